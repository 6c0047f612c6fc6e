"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--quick] [--repeat R]

Each kernel runs on the same inputs under both backends; the script prints
the best-of-R wall time per backend, the speed-up, and whether the outputs
agree.
"""

import argparse
import time

import numpy as np

from lipsel import _kernels_py

try:
    from lipsel import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _metric(rng, n):
    P = rng.uniform(size=(n, 2))
    return np.abs(P[:, None, :] - P[None, :, :]).max(axis=2)


def _lp_tableau(rng, m, nv):
    # min c.x, A x <= b with b > 0: the slack basis is feasible; the run may
    # end optimal or unbounded, either way it exercises the pivot loop
    A = rng.normal(size=(m, nv))
    b = rng.uniform(1, 2, size=m)
    c = rng.normal(size=nv)
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv : nv + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :nv] = c
    return T, np.arange(nv, nv + m, dtype=np.int64)


def cases(rng, quick):
    n = 60 if quick else 250
    D = _metric(rng, n)
    W = np.where(rng.random((n, n)) < 0.1, D, np.inf)
    W = np.minimum(W, W.T)
    np.fill_diagonal(W, 0.0)
    P = rng.normal(size=(n, 3))
    b = rng.normal(size=n)
    group = rng.integers(0, n // 4, size=n).astype(np.int64)
    r = rng.uniform(0, 0.1, size=n)
    rho_parent = _metric(rng, n // 4)
    m, nv = (30, 20) if quick else (120, 80)
    T0, basis0 = _lp_tableau(rng, m, nv)

    def pivot(mod):
        def run():
            T = T0.copy()
            basis = basis0.copy()
            allowed = np.ones(T.shape[1] - 1, dtype=np.uint8)
            st = mod.simplex_pivot_loop(T, basis, m, m, allowed, 1e-10, 1e-11, 50_000)
            return (st[0], float(T[m, -1]))

        return run

    return {
        "floyd_warshall": lambda mod: (lambda: mod.floyd_warshall(W.copy())),
        "minplus": lambda mod: (lambda: mod.minplus(b, D)),
        "seminorm_dense": lambda mod: (lambda: mod.seminorm_dense(P, D, 1e-12)[0]),
        "seminorm_doubled": lambda mod: (lambda: mod.seminorm_doubled(P, group, r, rho_parent, 1e-12)[0]),
        "simplex_pivot_loop": pivot,
    }


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return bool(np.allclose(a, b, rtol=1e-9, atol=1e-12, equal_nan=True))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small inputs")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    rows = []
    print(f"{'kernel':<20} {'python [s]':>12} {'compiled [s]':>13} {'speed-up':>9}  agree")
    for name, make in cases(rng, args.quick).items():
        tp, op = _best(make(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:<20} {tp:>12.4g} {'n/a':>13} {'n/a':>9}  n/a")
            rows.append((name, tp, None, None))
            continue
        tc, oc = _best(make(_compiled), args.repeat)
        ok = _agree(op, oc)
        print(f"{name:<20} {tp:>12.4g} {tc:>13.4g} {tp / tc:>9.1f}  {ok}")
        rows.append((name, tp, tc, ok))
    return rows


if __name__ == "__main__":
    main()
