"""Time the compiled kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Both implementations are imported directly, so the backend flag does not
matter here.  The first numba call (compilation or cache load) is excluded.
"""
import argparse
import time

import numpy as np

from vmcascade.instances import random_cascade_model, random_conditional, random_degraded_model
from vmcascade.kernels import _numba_impl as fast
from vmcascade.kernels import _numpy_impl as slow


def _cases(rng):
    m = random_cascade_model(rng, 3, 3, 2, 3)
    nu = m.u_bound
    pxy, vm = np.ascontiguousarray(m.source.mass), np.ascontiguousarray(m.vm.mass)
    theta = random_conditional(rng, (m.nx * m.ny,), m.n1 * m.na * nu).ravel()
    yield "cascade_terms", "cascade_terms", (theta, pxy, vm, m.d1, m.d2, m.cost, nu)

    act = random_conditional(rng, (m.nx * m.ny,), m.na).ravel()
    yield "cascade_lossless_terms", "cascade_lossless_terms", (act, pxy, vm, m.cost)

    b = random_degraded_model(rng, 3, 3, 3, 3)
    p_y, p_z = b.degraded_factors()
    px, pyz = np.ascontiguousarray(b.source.mass), np.ascontiguousarray(b.vm.mass)
    act = random_conditional(rng, (b.nx,), b.na).ravel()
    yield "broadcast_lossless_terms", "broadcast_lossless_terms", (act, px, pyz, b.cost)

    rec = random_conditional(rng, (b.nx * b.na,), b.n1 * b.n2).ravel()
    yield "cr_terms", "cr_terms", (np.concatenate([act, rec]), px, np.ascontiguousarray(p_y),
                                   np.ascontiguousarray(p_z), b.d1, b.d2, b.cost)

    pxw = 0.5 * np.array([[0.4, 0.6], [0.0, 1.0]])
    grid = np.linspace(0.0, 1.0, 201)
    al, be = (g.ravel() for g in np.meshgrid(grid, grid, indexing="ij"))
    yield "switching_grid (201x201)", "switching_grid", (pxw, al, be)


def _time(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':28s} {'numba':>12s} {'numpy':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, name, call in _cases(rng):
        f, s = getattr(fast, name), getattr(slow, name)
        out_f = f(*call)        # compile / load from cache
        out_s = s(*call)
        diff = max(float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
                   for a, b in zip(out_f, out_s))
        tf = _time(f, call, args.repeat)
        ts = _time(s, call, max(args.repeat // 5, 1))
        print(f"{label:28s} {tf * 1e6:10.1f}us {ts * 1e6:10.1f}us {ts / tf:7.1f}x {diff:10.2e}")


if __name__ == "__main__":
    main()
