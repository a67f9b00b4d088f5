"""Outer position decoupler and inner feedback-linearization loop.

The outer loop converts horizontal position errors into roll/pitch
references through the gravity coupling; the inner loop linearizes the
(roll, pitch, yaw, altitude) dynamics exactly by inverting the decoupling
matrix, then saturates the rotor-speed commands.

A singular decoupling matrix is flagged rather than raised: the loop
holds the last safe command and lets the caller decide whether to abort.

The float-tuple helpers ``decoupler_core`` and ``fl_core`` are the single
implementation of the control laws; the public operations wrap them and
the simulation loop calls them directly to avoid per-step overhead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from tiltrotor._core import kernels
from tiltrotor.linearization import EPS_SING
from tiltrotor.model import Params, State, _alpha4, check_pitch


@dataclass(frozen=True)
class Gains:
    """Controller gains and limits.

    ``kp``/``kd`` act per channel on (roll, pitch, yaw, altitude);
    ``kp_xy``/``kd_xy`` drive the outer position loop; ``clamp`` bounds
    the attitude references handed to the inner loop [rad].
    """

    kp: np.ndarray = field(default_factory=lambda: np.full(4, 4.0))
    kd: np.ndarray = field(default_factory=lambda: np.full(4, 4.0))
    kp_xy: float = 0.5
    kd_xy: float = 1.5
    clamp: float = 0.35

    def __post_init__(self):
        kp = np.broadcast_to(np.asarray(self.kp, dtype=float), (4,)).copy()
        kd = np.broadcast_to(np.asarray(self.kd, dtype=float), (4,)).copy()
        object.__setattr__(self, "kp", kp)
        object.__setattr__(self, "kd", kd)
        if np.any(kp <= 0) or np.any(kd <= 0) or self.kp_xy <= 0 or self.kd_xy <= 0:
            raise ValueError("all gains must be positive")
        if not 0.0 < self.clamp < math.pi / 2:
            raise ValueError(f"clamp must lie in (0, pi/2), got {self.clamp}")

    @classmethod
    def from_dict(cls, d: dict) -> "Gains":
        kw = {}
        for key in ("kp", "kd"):
            if key in d:
                kw[key] = np.asarray(d[key], dtype=float)
        for key in ("kp_xy", "kd_xy", "clamp"):
            if key in d:
                kw[key] = float(d[key])
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "Gains":
        """Read the ``gains`` section of the shared configuration file."""
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh).get("gains", {}))


load_gains = Gains.from_json


def load_config(path) -> tuple[Params, Gains, dict]:
    """Load the shared JSON configuration.

    Returns ``(params, gains, extras)`` where ``extras`` carries loop
    options such as ``abort_on_singular`` (default True).
    """
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    params = Params.from_dict(d)
    gains = Gains.from_dict(d.get("gains", {}))
    extras = {"abort_on_singular": bool(d.get("abort_on_singular", True))}
    return params, gains, extras


@dataclass(frozen=True)
class InnerRefs:
    """References for the (roll, pitch, yaw, altitude) channels."""

    value: np.ndarray = field(default_factory=lambda: np.zeros(4))
    rate: np.ndarray = field(default_factory=lambda: np.zeros(4))
    accel: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        for name in ("value", "rate", "accel"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (4,):
                raise ValueError(f"{name} must be a 4-vector")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ControlOutput:
    varpi_cmd: np.ndarray
    det_delta: float
    saturated: np.ndarray
    singular: bool


def saturate(varpi, params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Clamp each speed magnitude into ``[omega_lo, omega_hi]``, keeping sign.

    Returns ``(varpi_sat, flags)``; a flag is set iff clamping changed
    the value.  Idempotent.
    """
    v = np.asarray(varpi, dtype=float)
    mag = np.clip(np.abs(v), params.omega_lo, params.omega_hi)
    out = np.copysign(mag, v)
    return out, out != v


def _sat1(v: float, lo: float, hi: float) -> float:
    mag = abs(v)
    if mag < lo:
        mag = lo
    elif mag > hi:
        mag = hi
    return math.copysign(mag, v)


def decoupler_core(px, py, vx, vy, psi,
                   rpx, rpy, rvx, rvy, rax, ray,
                   kp_xy, kd_xy, clamp, g):
    """Float core of the position decoupler; returns ``(phi_ref, theta_ref)``."""
    ux = rax + kd_xy * (rvx - vx) + kp_xy * (rpx - px)
    uy = ray + kd_xy * (rvy - vy) + kp_xy * (rpy - py)
    cp, sp = math.cos(psi), math.sin(psi)
    theta_ref = (ux * cp + uy * sp) / g
    phi_ref = (ux * sp - uy * cp) / g
    if phi_ref > clamp:
        phi_ref = clamp
    elif phi_ref < -clamp:
        phi_ref = -clamp
    if theta_ref > clamp:
        theta_ref = clamp
    elif theta_ref < -clamp:
        theta_ref = -clamp
    return phi_ref, theta_ref


def position_decoupler(state: State, ref, gains: Gains, params: Params) -> tuple[float, float]:
    """Roll/pitch references that steer horizontal position along ``ref``.

    ``ref`` provides ``pos``, ``vel``, ``acc`` 3-vectors.  The commanded
    horizontal accelerations are rotated by the current yaw, scaled by
    gravity, then clamped to ``+/- gains.clamp``.
    """
    return decoupler_core(
        float(state.pos[0]), float(state.pos[1]),
        float(state.vel[0]), float(state.vel[1]),
        float(state.eta[2]),
        float(ref.pos[0]), float(ref.pos[1]),
        float(ref.vel[0]), float(ref.vel[1]),
        float(ref.acc[0]), float(ref.acc[1]),
        gains.kp_xy, gains.kd_xy, gains.clamp, params.g,
    )


def fl_core(z, vz, phi, theta, psi, p, q, r, alpha4,
            ref_val, ref_rate, ref_acc,
            kp4, kd4, pack, omega_lo, omega_hi, eps_sing, last_cmd):
    """Float core of the inner loop.

    ``alpha4``, ``ref_*``, ``kp4``, ``kd4`` and ``last_cmd`` are 4-tuples;
    ``pack`` is the kernel parameter pack.  Returns
    ``(varpi4, det, sat4, singular)``.
    """
    d, b, det, scale = kernels.decoupling(phi, theta, p, q, r, alpha4, pack)
    if det == 0.0 or abs(det) < eps_sing * scale**4:
        held = last_cmd
        out = (
            _sat1(held[0], omega_lo, omega_hi),
            _sat1(held[1], omega_lo, omega_hi),
            _sat1(held[2], omega_lo, omega_hi),
            _sat1(held[3], omega_lo, omega_hi),
        )
        sat = (out[0] != held[0], out[1] != held[1], out[2] != held[2], out[3] != held[3])
        return out, det, sat, True

    T9 = kernels.euler_rate_entries(phi, theta)
    y0, y1, y2, y3 = phi, theta, psi, z
    yd0 = T9[0] * p + T9[1] * q + T9[2] * r
    yd1 = T9[3] * p + T9[4] * q + T9[5] * r
    yd2 = T9[6] * p + T9[7] * q + T9[8] * r
    yd3 = vz
    rhs = (
        ref_acc[0] + kd4[0] * (ref_rate[0] - yd0) + kp4[0] * (ref_val[0] - y0) - b[0],
        ref_acc[1] + kd4[1] * (ref_rate[1] - yd1) + kp4[1] * (ref_val[1] - y1) - b[1],
        ref_acc[2] + kd4[2] * (ref_rate[2] - yd2) + kp4[2] * (ref_val[2] - y2) - b[2],
        ref_acc[3] + kd4[3] * (ref_rate[3] - yd3) + kp4[3] * (ref_val[3] - y3) - b[3],
    )
    w = kernels.solve4(d, rhs)
    raw = (
        math.copysign(math.sqrt(abs(w[0])), w[0]) if w[0] != 0.0 else 0.0,
        math.copysign(math.sqrt(abs(w[1])), w[1]) if w[1] != 0.0 else 0.0,
        math.copysign(math.sqrt(abs(w[2])), w[2]) if w[2] != 0.0 else 0.0,
        math.copysign(math.sqrt(abs(w[3])), w[3]) if w[3] != 0.0 else 0.0,
    )
    out = (
        _sat1(raw[0], omega_lo, omega_hi),
        _sat1(raw[1], omega_lo, omega_hi),
        _sat1(raw[2], omega_lo, omega_hi),
        _sat1(raw[3], omega_lo, omega_hi),
    )
    sat = (out[0] != raw[0], out[1] != raw[1], out[2] != raw[2], out[3] != raw[3])
    return out, det, sat, False


def fl_inner_loop(
    state: State,
    alpha,
    refs: InnerRefs,
    gains: Gains,
    params: Params,
    last_command=None,
    eps_sing: float = EPS_SING,
) -> ControlOutput:
    """One evaluation of the exact-linearization law on (roll, pitch, yaw, altitude).

    Computes ``v = r'' + kd (r' - y') + kp (r - y)``, solves ``Delta w =
    v - b`` for the signed squared speeds, converts to rotor speeds, and
    saturates.  When the scale-aware determinant test fires, the output
    is the last safe command (or the spin-sign pattern at the magnitude
    floor if none is given) with ``singular=True``.
    """
    theta = float(state.eta[1])
    check_pitch(theta)
    if last_command is None:
        held = tuple(params.spin_sign * params.omega_lo)
    else:
        held = tuple(float(v) for v in last_command)
    varpi, det, sat, singular = fl_core(
        float(state.pos[2]), float(state.vel[2]),
        float(state.eta[0]), theta, float(state.eta[2]),
        float(state.omega[0]), float(state.omega[1]), float(state.omega[2]),
        _alpha4(alpha),
        tuple(refs.value), tuple(refs.rate), tuple(refs.accel),
        tuple(gains.kp), tuple(gains.kd),
        params.pack, params.omega_lo, params.omega_hi, eps_sing, held,
    )
    return ControlOutput(
        varpi_cmd=np.array(varpi),
        det_delta=det,
        saturated=np.array(sat, dtype=bool),
        singular=singular,
    )


class InnerLoop:
    """Inner-loop context owning the one-step memory of the last safe command.

    Not safe to share across concurrent simulations; clone per run.
    """

    def __init__(self, gains: Gains, params: Params, initial_command=None,
                 eps_sing: float = EPS_SING):
        self.gains = gains
        self.params = params
        self.eps_sing = eps_sing
        self.last_safe = None if initial_command is None else np.asarray(initial_command, float)

    def step(self, state: State, alpha, refs: InnerRefs) -> ControlOutput:
        out = fl_inner_loop(
            state, alpha, refs, self.gains, self.params,
            last_command=self.last_safe, eps_sing=self.eps_sing,
        )
        if not out.singular:
            self.last_safe = out.varpi_cmd
        return out
