import json
import math

import numpy as np
import pytest

import tiltrotor as tr
from tiltrotor.control import InnerLoop


def _ref(pos=(0, 0, 0), vel=(0, 0, 0), acc=(0, 0, 0)):
    return tr.Reference(pos=np.asarray(pos, float), vel=np.asarray(vel, float),
                        acc=np.asarray(acc, float))


# ---------------------------------------------------------------------------
# position decoupler


def test_decoupler_zero_error(params, gains):
    state = tr.State(pos=np.array([1.0, 2.0, 0.0]))
    phi_r, theta_r = tr.position_decoupler(state, _ref(pos=(1, 2, 0)), gains, params)
    assert phi_r == 0.0 and theta_r == 0.0


def test_decoupler_axis_alignment(params, gains):
    # pure x-acceleration request of 0.1 g with zero yaw -> pitch reference
    state = tr.State()
    phi_r, theta_r = tr.position_decoupler(
        state, _ref(acc=(0.1 * params.g, 0, 0)), gains, params
    )
    assert abs(theta_r - 0.1) < 1e-15 and abs(phi_r) < 1e-15
    # same request at yaw pi/2 -> roll reference
    state = tr.State(eta=np.array([0.0, 0.0, math.pi / 2]))
    phi_r, theta_r = tr.position_decoupler(
        state, _ref(acc=(0.1 * params.g, 0, 0)), gains, params
    )
    assert abs(phi_r - 0.1) < 1e-15 and abs(theta_r) < 1e-15


def test_decoupler_clamped(params, gains, rng):
    for _ in range(50):
        state = tr.State(pos=rng.uniform(-50, 50, 3), vel=rng.uniform(-20, 20, 3),
                         eta=np.array([0, 0, rng.uniform(-math.pi, math.pi)]))
        phi_r, theta_r = tr.position_decoupler(state, _ref(), gains, params)
        assert abs(phi_r) <= gains.clamp and abs(theta_r) <= gains.clamp


# ---------------------------------------------------------------------------
# saturation


def test_saturate_examples(params):
    p = tr.Params(omega_lo=15.0, omega_hi=900.0)
    out, flags = tr.saturate([1000.0, -10.0, 500.0, -950.0], p)
    np.testing.assert_array_equal(out, [900.0, -15.0, 500.0, -900.0])
    np.testing.assert_array_equal(flags, [True, True, False, True])


def test_saturate_idempotent(params, rng):
    v = rng.uniform(-1200, 1200, 4)
    once, _ = tr.saturate(v, params)
    twice, flags = tr.saturate(once, params)
    np.testing.assert_array_equal(once, twice)
    assert not flags.any()


# ---------------------------------------------------------------------------
# inner loop


def test_inner_loop_hover_allocation(params, gains):
    state = tr.State()
    out = tr.fl_inner_loop(state, np.zeros(4), tr.InnerRefs(), gains, params)
    hover = params.hover_speed
    np.testing.assert_allclose(out.varpi_cmd, params.spin_sign * hover, rtol=1e-9)
    assert not out.singular and not out.saturated.any()
    # the solved input balances gravity through the decoupling matrix
    dm = tr.decoupling_matrix(state.eta, np.zeros(4), params)
    w = tr.speeds_to_input(out.varpi_cmd)
    np.testing.assert_allclose(dm.delta @ w, [0, 0, 0, params.g], atol=1e-9)


def test_inner_loop_reconstruction(params_nosat, gains, rng):
    # Delta w + b reproduces the commanded v when unsaturated
    for _ in range(50):
        x = rng.uniform(-0.5, 0.5, 12)
        state = tr.State.from_array(x)
        alpha = rng.uniform(-0.3, 0.3, 4)
        refs = tr.InnerRefs(value=rng.uniform(-0.2, 0.2, 4),
                            rate=rng.uniform(-0.2, 0.2, 4),
                            accel=rng.uniform(-0.2, 0.2, 4))
        out = tr.fl_inner_loop(state, alpha, refs, gains, params_nosat)
        assert not out.saturated.any() and not out.singular
        dm = tr.decoupling_matrix(state.eta, alpha, params_nosat)
        b = tr.drift_vector(state, params_nosat)
        w = tr.speeds_to_input(out.varpi_cmd)
        T = tr.euler_rate_matrix(state.eta)
        eta_dot = T @ state.omega
        y = np.array([x[6], x[7], x[8], x[2]])
        ydot = np.array([eta_dot[0], eta_dot[1], eta_dot[2], x[5]])
        v = refs.accel + gains.kd * (refs.rate - ydot) + gains.kp * (refs.value - y)
        recon = dm.delta @ w + b
        assert np.max(np.abs(recon - v)) <= 1e-10 * max(1.0, np.max(np.abs(v)))


def test_inner_loop_singular_flag_and_hold(params, gains):
    state = tr.State()
    last = np.array([-500.0, 500.0, -500.0, 500.0])
    # an absurd threshold forces the singular branch
    out = tr.fl_inner_loop(state, np.zeros(4), tr.InnerRefs(), gains, params,
                           last_command=last, eps_sing=1e9)
    assert out.singular
    np.testing.assert_array_equal(out.varpi_cmd, last)


def test_inner_loop_singular_on_degenerate_completion(params, gains):
    # on-branch completion with C = 0 is singular at level attitude
    def c_on_sheet(a2):
        return tr.det_decomposition((0.2, a2, 0.2, a2), params).C

    lo, hi = -0.2, 0.2
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if c_on_sheet(lo) * c_on_sheet(mid) <= 0:
            hi = mid
        else:
            lo = mid
    alpha = np.array([0.2, lo, 0.2, lo])
    out = tr.fl_inner_loop(tr.State(), alpha, tr.InnerRefs(), gains, params)
    assert out.singular


def test_inner_loop_memory(params, gains):
    loop = InnerLoop(gains, params)
    out1 = loop.step(tr.State(), np.zeros(4), tr.InnerRefs())
    assert not out1.singular
    np.testing.assert_array_equal(loop.last_safe, out1.varpi_cmd)
    # singular step must not overwrite the memory
    loop.eps_sing = 1e9
    out2 = loop.step(tr.State(), np.zeros(4), tr.InnerRefs())
    assert out2.singular
    np.testing.assert_array_equal(loop.last_safe, out1.varpi_cmd)
    np.testing.assert_array_equal(out2.varpi_cmd, out1.varpi_cmd)


def test_closed_loop_identity_one_step(params_nosat, gains):
    # with exact linearization each output obeys e'' = -kd e' - kp e;
    # verify the second derivative by finite differences over tiny steps
    state = tr.State(eta=np.array([0.08, -0.05, 0.1]), pos=np.array([0, 0, 0.1]))
    alpha = np.zeros(4)
    out = tr.fl_inner_loop(state, alpha, tr.InnerRefs(), gains, params_nosat)
    varpi = out.varpi_cmd
    h = 1e-6

    def outputs(s):
        T = tr.euler_rate_matrix(s.eta)
        eta_dot = T @ s.omega
        return np.array([s.eta[0], s.eta[1], s.eta[2], s.pos[2]]), \
            np.array([eta_dot[0], eta_dot[1], eta_dot[2], s.vel[2]])

    s_p = tr.integrate_step(state, lambda t: alpha, lambda t: varpi, 0.0, h, params_nosat)
    s_pp = tr.integrate_step(s_p, lambda t: alpha, lambda t: varpi, h, h, params_nosat)
    y0, yd0 = outputs(state)
    y1, _ = outputs(s_p)
    y2, _ = outputs(s_pp)
    ydd = (y2 - 2 * y1 + y0) / h**2
    v = gains.kd * (0.0 - yd0) + gains.kp * (0.0 - y0)
    np.testing.assert_allclose(ydd, v, atol=1e-4)


def test_analytic_second_order_response(params_nosat, gains):
    # all four channels start 0.1 off and must follow the critically
    # damped closed form within 2% over 2 s
    dt = 1e-3
    state = tr.State(pos=np.array([0.0, 0.0, 0.1]), eta=np.array([0.1, 0.1, 0.1]))
    loop = InnerLoop(gains, params_nosat)
    alpha = np.zeros(4)
    n = int(round(2.0 / dt))
    worst = np.zeros(4)
    for k in range(n + 1):
        t = k * dt
        y = np.array([state.eta[0], state.eta[1], state.eta[2], state.pos[2]])
        expected = 0.1 * (1.0 + 2.0 * t) * math.exp(-2.0 * t)
        worst = np.maximum(worst, np.abs(y - expected))
        out = loop.step(state, alpha, tr.InnerRefs())
        varpi = out.varpi_cmd
        state = tr.integrate_step(state, lambda _t: alpha, lambda _t: varpi, t, dt, params_nosat)
    assert np.all(worst <= 0.02 * 0.1)


# ---------------------------------------------------------------------------
# gains and configuration


@pytest.mark.parametrize("bad", [
    {"kp": 0.0}, {"kd": [-1, 1, 1, 1]}, {"kp_xy": 0.0}, {"clamp": 0.0},
    {"clamp": 2.0},
])
def test_gains_validation(bad):
    with pytest.raises(ValueError):
        tr.Gains(**bad)


def test_config_file_roundtrip(tmp_path):
    cfg = {
        "m": 1.1, "g": 9.81, "k_f": 8.048e-6, "k_m": 2.423e-7, "arm_length": 0.3,
        "inertia": [0.01, 0, 0, 0, 0.01, 0, 0, 0, 0.02],
        "omega_lo": 12.0, "omega_hi": 850.0, "spin_sign": [-1, 1, -1, 1],
        "gains": {"kp": [4, 4, 4, 4], "kd": 4.0, "kp_xy": 0.5, "kd_xy": 1.5, "clamp": 0.35},
        "abort_on_singular": False,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    params, gains, extras = tr.load_config(path)
    assert params.m == 1.1 and params.omega_lo == 12.0
    np.testing.assert_array_equal(gains.kp, [4, 4, 4, 4])
    assert gains.kd_xy == 1.5
    assert extras["abort_on_singular"] is False
    # the gains loader alone reads the same file
    g2 = tr.load_gains(path)
    np.testing.assert_array_equal(g2.kp, gains.kp)
    np.testing.assert_array_equal(g2.kd, gains.kd)
    assert (g2.kp_xy, g2.kd_xy, g2.clamp) == (gains.kp_xy, gains.kd_xy, gains.clamp)
