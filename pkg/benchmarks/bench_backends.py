#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the hot paths in isolation (derivative, integrator step, decoupling
assembly + solve, branch Newton) and one end-to-end closed-loop second.

Usage: python benchmarks/bench_backends.py [--loops N]
"""

import argparse
import time

import tiltrotor as tr
from tiltrotor._core import kernels_py

try:
    from tiltrotor._core import kernels_cy
except ImportError:
    kernels_cy = None

KF, KM, ARM = 8.048e-6, 2.423e-7, 0.3


def time_call(fn, loops):
    t0 = time.perf_counter()
    for _ in range(loops):
        fn()
    return (time.perf_counter() - t0) / loops


def bench_kernels(k, loops):
    params = tr.Params()
    pp = params.pack
    s = (0.1, -0.2, 0.05, 0.3, -0.1, 0.0, 0.08, -0.06, 0.3, 0.2, -0.1, 0.05)
    al = (0.3, -0.2, 0.1, 0.4)
    w = tuple(tr.speeds_to_input(tr.hover_speeds(params)))
    rhs = (0.1, -0.2, 0.05, 9.81)
    d = k.decoupling(s[6], s[7], s[9], s[10], s[11], al, pp)[0]
    return {
        "state_derivative": time_call(lambda: k.state_derivative(s, al, w, pp), loops),
        "rk4_step": time_call(lambda: k.rk4_step(s, al, al, al, w, w, w, 1e-3, pp), loops),
        "decoupling": time_call(
            lambda: k.decoupling(s[6], s[7], s[9], s[10], s[11], al, pp), loops
        ),
        "solve4": time_call(lambda: k.solve4(d, rhs), loops),
        "newton_ab": time_call(
            lambda: k.newton_ab(0.4, -0.3, 0.3, -0.2, KF, KM, ARM, 1e-30, 60),
            max(1, loops // 10),
        ),
    }


def bench_tracking(backend_module):
    import tiltrotor.control as control
    import tiltrotor.sim as sim

    saved = (sim.kernels, control.kernels)
    sim.kernels = control.kernels = backend_module
    try:
        params = tr.Params()
        gains = tr.Gains()
        gait = tr.build_preset("gait1", params)
        config = tr.SimConfig(duration=1.0)
        t0 = time.perf_counter()
        tr.run_tracking(config, params, gains, gait)
        return time.perf_counter() - t0
    finally:
        sim.kernels, control.kernels = saved


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--loops", type=int, default=20000)
    args = ap.parse_args()

    backends = [("python", kernels_py)]
    if kernels_cy is not None:
        backends.insert(0, ("cython", kernels_cy))
    else:
        print("compiled kernels not available; timing the fallback only")

    results = {name: bench_kernels(mod, args.loops) for name, mod in backends}
    names = sorted(results[backends[0][0]])

    header = f"{'kernel':<18}" + "".join(f"{name:>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for key in names:
        row = f"{key:<18}"
        for name, _ in backends:
            row += f"{results[name][key] * 1e6:>12.2f}us"
        if len(backends) == 2:
            row += f"{results['python'][key] / results['cython'][key]:>9.1f}x"
        print(row)

    print()
    for name, mod in backends:
        wall = bench_tracking(mod)
        print(f"closed-loop tracking, 1 s sim ({name:>6}): {wall * 1e3:8.1f} ms")


if __name__ == "__main__":
    main()
