"""Brute-force reference computations.

Everything here is an LP written directly from the definitions, independent
of the constructive selection pipeline: optimal Lipschitz constants of
selections, the subset enumeration behind finiteness statements, minimal
jet norms on small subsets and grid convex envelopes.
"""

import dataclasses
import itertools
import math
import time

import numpy as np

from .errors import InputError, InternalError
from .metricspace import PseudometricSpace, admissible_subsets, count_subsets
from .solvers import INFEASIBLE, OPTIMAL, solve_dense

SUBSET_CAP = 100_000
# optima at or below this are round-off of an exact 0 on unit-scale instances
ZERO_LAMBDA = 1e-12


@dataclasses.dataclass
class OracleReport:
    lambda_star: float
    witness: np.ndarray = None
    subset_results: list = dataclasses.field(default_factory=list)
    argmax: tuple = None
    timing: float = 0.0
    n_solved: int = 0
    n_skipped: int = 0


def _dist_matrix(space):
    if isinstance(space, PseudometricSpace):
        return np.asarray(space.dist, dtype=float)
    return np.asarray(space, dtype=float)


def optimal_selection_lp(space, flats):
    """Smallest ``lam`` such that some selection of ``flats`` is ``lam``-Lipschitz for ``rho``.

    One LP in the flat parameters and ``lam``. Pairs at distance ``inf`` impose
    nothing, pairs at distance 0 force equal values. ``lambda_star = inf``
    when no selection exists.
    """
    t0 = time.perf_counter()
    rho = _dist_matrix(space)
    N = len(flats)
    if rho.shape != (N, N):
        raise InputError("one flat per point is required")
    n = flats[0].ambient
    dims = [F.dim for F in flats]
    off = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    nv = int(off[-1]) + 1  # last variable is lam
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for v, w in itertools.combinations(range(N), 2):
        r = rho[v, w]
        if math.isinf(r):
            continue
        # f(v) - f(w) = (base_v - base_w) + B_v^T t_v - B_w^T t_w
        block = np.zeros((n, nv))
        block[:, off[v] : off[v + 1]] = flats[v].basis.T
        block[:, off[w] : off[w + 1]] -= flats[w].basis.T
        delta = flats[v].base - flats[w].base
        if r == 0:
            eq_rows.append(block)
            eq_rhs.append(-delta)
            continue
        lam_col = np.zeros((n, nv))
        lam_col[:, -1] = r
        ub_rows += [block - lam_col, -block - lam_col]
        ub_rhs += [-delta, delta]
    obj = np.zeros(nv)
    obj[-1] = 1.0
    lam_row = np.zeros((1, nv))
    lam_row[0, -1] = -1.0
    A_ub = np.vstack(ub_rows + [lam_row])
    b_ub = np.concatenate(ub_rhs + [np.zeros(1)])
    A_eq = np.vstack(eq_rows) if eq_rows else None
    b_eq = np.concatenate(eq_rhs) if eq_rhs else None
    res = solve_dense([obj], A_ub, b_ub, A_eq, b_eq)
    if res.status == INFEASIBLE:
        return OracleReport(math.inf, timing=time.perf_counter() - t0, n_solved=1)
    if res.status != OPTIMAL:
        raise InternalError(f"selection LP returned {res.status}")
    x = res.x
    witness = np.array([F.base + F.basis.T @ x[off[v] : off[v + 1]] for v, F in enumerate(flats)]).reshape(N, n)
    return OracleReport(float(max(x[-1], 0.0)), witness, timing=time.perf_counter() - t0, n_solved=1)


def _pruned_max(candidates, solve, prune):
    """Max of ``solve(W)`` over ``candidates`` (largest first), skipping subsets of solved sets.

    Skipping is exact because the optimum can only grow with the subset.
    """
    results = []
    solved_masks = []
    best, arg = -math.inf, None
    skipped = 0
    for W in candidates:
        mask = sum(1 << v for v in W)
        if prune and any(mask & S == mask for S in solved_masks):
            skipped += 1
            continue
        val = solve(W)
        results.append((W, val))
        solved_masks.append(mask)
        if val > best:
            best, arg = val, W
    return best, arg, results, skipped


def finiteness_check(am, max_size=None, prune=True):
    """Max over admissible subsets ``W`` (``|W| <= 2^(k+1)``) of the optimal selection constant on ``W``."""
    t0 = time.perf_counter()
    size = 2 ** (am.k + 1) if max_size is None else int(max_size)
    N = am.graph.n_vertices
    if count_subsets(N, size) > SUBSET_CAP:
        raise InputError(f"more than {SUBSET_CAP} subsets of size <= {size} on {N} vertices")
    rho = np.asarray(am.rho, dtype=float)
    subsets = sorted(admissible_subsets(am.graph, size), key=lambda W: (-len(W), W))

    def solve(W):
        idx = list(W)
        return optimal_selection_lp(rho[np.ix_(idx, idx)], [am.flats[v] for v in idx]).lambda_star

    best, arg, results, skipped = _pruned_max(subsets, solve, prune)
    return OracleReport(
        max(best, 0.0),
        subset_results=results,
        argmax=arg,
        timing=time.perf_counter() - t0,
        n_solved=len(results),
        n_skipped=skipped,
    )


def minimal_jet_norm(X, f, omega):
    """``min_g`` of the jet norm of ``(f, g)`` on ``X`` and the minimising ``g``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f = np.asarray(f, dtype=float).reshape(-1)
    m, n = X.shape
    sup_f = float(np.abs(f).max(initial=0.0))
    if m == 1:
        return sup_f, np.zeros((1, n))
    # variables: g (m*n), s_g, T, G
    ng = m * n
    nv = ng + 3
    iS, iT, iG = ng, ng + 1, ng + 2
    rows, rhs = [], []
    for p in range(m):
        for k in range(n):
            for sgn in (1.0, -1.0):
                r = np.zeros(nv)
                r[p * n + k] = sgn
                r[iS] = -1.0
                rows.append(r)
                rhs.append(0.0)
    for x, y in itertools.permutations(range(m), 2):
        d = X[x] - X[y]
        t = float(np.abs(d).max())
        w = float(omega(t))
        # |f(x) - f(y) - <g(y), d>| <= T t w
        for sgn in (1.0, -1.0):
            r = np.zeros(nv)
            r[y * n : (y + 1) * n] = sgn * d
            r[iT] = -t * w
            rows.append(r)
            rhs.append(sgn * (f[x] - f[y]))
        if x < y:
            for k in range(n):
                for sgn in (1.0, -1.0):
                    r = np.zeros(nv)
                    r[x * n + k] = sgn
                    r[y * n + k] = -sgn
                    r[iG] = -w
                    rows.append(r)
                    rhs.append(0.0)
    obj = np.zeros(nv)
    obj[[iS, iT, iG]] = 1.0
    res = solve_dense([obj], np.array(rows), np.array(rhs))
    if res.status != OPTIMAL:
        raise InternalError(f"jet LP returned {res.status}")
    return sup_f + float(res.value), res.x[:ng].reshape(m, n)


def jet_finiteness_check(sf, max_card=None, prune=True):
    """Max over ``Y`` with ``|Y| <= max_card`` of the minimal jet norm of ``f`` on ``Y``."""
    t0 = time.perf_counter()
    m, n = sf.X.shape
    card = 3 * 2 ** (n - 1) if max_card is None else int(max_card)
    if count_subsets(m, card) > SUBSET_CAP:
        raise InputError(f"more than {SUBSET_CAP} subsets of size <= {card} on {m} points")
    subsets = [W for s in range(min(card, m), 0, -1) for W in itertools.combinations(range(m), s)]

    def solve(W):
        idx = list(W)
        return minimal_jet_norm(sf.X[idx], sf.f[idx], sf.omega)[0]

    best, arg, results, skipped = _pruned_max(subsets, solve, prune)
    return OracleReport(
        best,
        subset_results=results,
        argmax=arg,
        timing=time.perf_counter() - t0,
        n_solved=len(results),
        n_skipped=skipped,
    )


def brute_force_envelope(fam, w, box, grid=41):
    """Convex envelope of ``fam.h`` at ``w`` from a grid in ``box``.

    Solves ``min sum lam_p h(p)`` over ``lam >= 0`` with ``sum lam = 1`` and
    ``sum lam_p p = w``, where ``p`` runs over a uniform grid of the cube.
    """
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.size != fam.dim:
        raise InputError("point dimension differs from the family")
    if not math.isfinite(box.radius):
        raise InputError("the grid box must be bounded")
    if not box.contains(w):
        raise InputError("point lies outside the grid box")
    axes = [np.linspace(lo, hi, int(grid)) for lo, hi in zip(box.lower, box.upper)]
    P = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, w.size)
    hv = np.array([fam.h(p) for p in P])
    A_eq = np.vstack([np.ones((1, P.shape[0])), P.T])
    b_eq = np.concatenate([[1.0], w])
    res = solve_dense([hv], A_eq=A_eq, b_eq=b_eq, nonneg=True)
    if res.status != OPTIMAL:
        raise InternalError(f"envelope LP returned {res.status}")
    return float(res.value)
