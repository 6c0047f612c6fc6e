"""Dense LP, Fourier-Motzkin elimination and the common-Hessian envelope QP.

Every variable of a :class:`LinearProgram` is free; sign constraints are
ordinary rows. The simplex uses Bland's rule throughout, so the returned
vertex is a deterministic function of the input.
"""

import dataclasses

import numpy as np

from . import kernels
from .config import get_tolerances
from .errors import InputError, InternalError

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

_REL = {"<=": 1.0, "≤": 1.0, ">=": -1.0, "≥": -1.0}


@dataclasses.dataclass
class LinearProgram:
    """minimize ``objective @ x`` subject to ``(row, rel, rhs)`` constraints.

    ``rel`` is one of ``"<="``, ``">="`` or ``"="``.
    """

    objective: np.ndarray
    constraints: list
    n_vars: int

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.objective.size != self.n_vars:
            raise InputError(
                f"objective has {self.objective.size} entries, expected {self.n_vars}"
            )
        for k, (row, rel, rhs) in enumerate(self.constraints):
            if len(row) != self.n_vars:
                raise InputError(f"constraint {k} has {len(row)} coefficients, expected {self.n_vars}")
            if rel not in _REL and rel not in ("=", "=="):
                raise InputError(f"constraint {k}: unknown relation {rel!r}")
            if not np.isfinite(rhs):
                raise InputError(f"constraint {k}: rhs must be finite")

    def matrices(self):
        ub, bub, eq, beq = [], [], [], []
        for row, rel, rhs in self.constraints:
            if rel in ("=", "=="):
                eq.append(row)
                beq.append(rhs)
            else:
                s = _REL[rel]
                ub.append(s * np.asarray(row, dtype=float))
                bub.append(s * rhs)
        nv = self.n_vars
        return (
            np.asarray(ub, dtype=float).reshape(-1, nv),
            np.asarray(bub, dtype=float),
            np.asarray(eq, dtype=float).reshape(-1, nv),
            np.asarray(beq, dtype=float),
        )


@dataclasses.dataclass
class LPResult:
    status: str
    x: np.ndarray = None
    value: float = None
    values: tuple = ()
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


def solve_lp(lp):
    """Solve a :class:`LinearProgram`; see :func:`solve_dense` for details."""
    A_ub, b_ub, A_eq, b_eq = lp.matrices()
    return solve_dense([lp.objective], A_ub, b_ub, A_eq, b_eq)


def solve_dense(objectives, A_ub=None, b_ub=None, A_eq=None, b_eq=None, nonneg=False):
    """Lexicographic minimisation subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    ``objectives`` is a list of cost vectors; the first is minimised, then the
    second over the optimal face of the first, and so on. Later stages only
    pivot on columns with zero reduced cost in every earlier stage, which is
    sequential LP refinement carried out inside a single tableau.

    Variables are free unless ``nonneg`` is set, in which case all are >= 0.
    Free variables are pivoted into the basis once (largest pivot first) and
    their rows never take part in a ratio test afterwards.
    """
    tol = get_tolerances()
    objectives = [np.asarray(c, dtype=float).reshape(-1) for c in objectives]
    nv = objectives[0].size
    A_ub = np.zeros((0, nv)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, nv)
    A_eq = np.zeros((0, nv)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, nv)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
    if b_ub.size != A_ub.shape[0] or b_eq.size != A_eq.shape[0]:
        raise InputError("constraint matrix and rhs sizes differ")
    if any(c.size != nv for c in objectives):
        raise InputError("all objectives need the same number of variables")
    m1, m2 = A_ub.shape[0], A_eq.shape[0]
    m = m1 + m2
    K = len(objectives)
    rhs_scale = max(1.0, float(np.abs(np.concatenate([b_ub, b_eq])).max(initial=0.0)))

    # columns: x | slacks ; rows: constraints then one row per objective
    ncols = nv + m1
    T = np.zeros((m + K, ncols + 1))
    T[:m1, :nv] = A_ub
    T[:m1, nv:ncols] = np.eye(m1)
    T[m1:m, :nv] = A_eq
    T[:m, -1] = np.concatenate([b_ub, b_eq])
    for q, c in enumerate(objectives):
        T[m + q, :nv] = c
    basis = np.full(m, -1, dtype=np.int64)
    basis[:m1] = nv + np.arange(m1)

    # free variables enter once, with partial pivoting over unused rows
    free_row = np.zeros(m, dtype=bool)
    null_free = []
    if not nonneg:
        amax = max(1.0, float(np.abs(T[:m, :nv]).max(initial=0.0)))
        for j in range(nv):
            cand = np.flatnonzero(~free_row)
            if cand.size == 0:
                null_free.append(j)
                continue
            r = int(cand[np.argmax(np.abs(T[cand, j]))])
            if abs(T[r, j]) <= tol.rank * amax:
                null_free.append(j)
                continue
            _pivot(T, r, j)
            basis[r] = j
            free_row[r] = True

    # constrained rows first, then free rows, then objectives
    order = np.concatenate([np.flatnonzero(~free_row), np.flatnonzero(free_row)])
    mc = int((~free_row).sum())
    T = np.vstack([T[order], T[m:]])
    basis = basis[order]

    # artificials for constrained rows without a feasible basic variable
    need = [i for i in range(mc) if basis[i] < 0 or T[i, -1] < 0]
    for i in need:
        if T[i, -1] < 0:
            T[i] = -T[i]
    n_art = len(need)
    ncols_all = ncols + n_art
    T = np.hstack([T[:, :ncols], np.zeros((T.shape[0], n_art)), T[:, ncols:]])
    for a, i in enumerate(need):
        T[i, ncols + a] = 1.0
        basis[i] = ncols + a
    is_art = np.zeros(ncols_all, dtype=bool)
    is_art[ncols:] = True
    usable = ~is_art
    usable[null_free] = False
    # phase-1 cost row sits right after the constraint rows
    T = np.vstack([T[:m], np.zeros((1, ncols_all + 1)), T[m:]])
    T[m, ncols:ncols_all] = 1.0
    T = np.ascontiguousarray(T)
    T0 = T.copy()  # raw data for refactorisation (unreduced cost rows)
    p1 = m
    iters = 0
    if n_art:
        for i in need:
            T[p1] -= T[i]
        # phase 1 is bounded below by 0, so an unbounded column is round-off
        status, it, _ = _run(T, T0, basis, mc, m, p1, usable, 1e-12, tol.pivot, skip_unbounded=True)
        iters += it
        if status == 2:
            raise InternalError("simplex iteration limit reached in phase 1")
        if -T[p1, -1] > tol.feas * rhs_scale:
            return LPResult(INFEASIBLE, iterations=iters)
        # drive zero-level artificials out of the basis; drop redundant rows
        keep = np.ones(T.shape[0], dtype=bool)
        for i in range(mc):
            if is_art[basis[i]]:
                row = T[i, :ncols_all]
                cand = np.flatnonzero(usable & (np.abs(row) > 1e-9))
                if cand.size == 0:
                    keep[i] = False
                    continue
                e = int(cand[np.argmax(np.abs(row[cand]))])
                _pivot(T, i, e)
                basis[i] = e
        if not keep.all():
            rows = np.flatnonzero(keep[:m])
            basis = np.ascontiguousarray(basis[rows])
            T = np.ascontiguousarray(T[keep])
            T0 = np.ascontiguousarray(T0[keep])
            mc -= m - rows.size
            m = rows.size
            p1 = m
        _refactor(T, T0, basis, m)
    allowed = usable
    for q in range(K):
        row = m + 1 + q
        cscale = max(1.0, float(np.abs(objectives[q]).max(initial=0.0)))
        tol_rc = 1e-10 * cscale
        # a free column outside the basis with nonzero cost is an unbounded direction
        if null_free and np.any(np.abs(T[row, null_free]) > tol_rc) and q == 0:
            return LPResult(UNBOUNDED, iterations=iters)
        status, it, _ = _run(T, T0, basis, mc, m, row, allowed, tol_rc, tol.pivot)
        iters += it
        if status == 1:
            return LPResult(UNBOUNDED, iterations=iters)
        if status == 2:
            raise InternalError("simplex iteration limit reached")
        allowed = allowed & (np.abs(T[row, :ncols_all]) <= tol_rc)
    xcols = np.zeros(ncols_all)
    vals = T[:m, -1].copy()
    vals[:mc] = np.maximum(vals[:mc], 0.0)
    xcols[basis] = vals
    x = xcols[:nv].copy()
    if nonneg:
        x = np.maximum(x, 0.0)
    # a basis that drifted through round-off shows up as a violated input row
    xs = max(1.0, float(np.abs(x).max(initial=0.0)))
    viol = 0.0
    if m1:
        viol = max(viol, float((A_ub @ x - b_ub).max()) / (xs * max(1.0, float(np.abs(A_ub).max()))))
    if m2:
        viol = max(viol, float(np.abs(A_eq @ x - b_eq).max()) / (xs * max(1.0, float(np.abs(A_eq).max()))))
    if viol > _FEAS_CHECK * rhs_scale:
        raise InternalError(f"simplex returned a point violating the constraints by {viol:.3g}")
    values = tuple(float(c @ x) for c in objectives)
    return LPResult(OPTIMAL, x=x, value=values[0], values=values, iterations=iters)


def _pivot(T, r, e):
    T[r] /= T[r, e]
    f = T[:, e].copy()
    f[r] = 0.0
    T -= np.outer(f, T[r])
    T[:, e] = 0.0
    T[r, e] = 1.0


_REFACTOR_EVERY = 64
_FEAS_CHECK = 1e-7
_MAX_ITER = 50_000


def _refactor(T, T0, basis, m):
    """Rebuild the tableau from the raw data for the current basis.

    Long runs of pivots accumulate round-off; recomputing ``B^-1 [A | b]``
    and the reduced costs restores consistency with the input.
    """
    if m == 0:
        return
    try:
        T[:m] = np.linalg.solve(T0[:m, basis], T0[:m])
    except np.linalg.LinAlgError:
        return
    T[:m, basis] = np.eye(m)
    for r in range(m, T.shape[0]):
        T[r] = T0[r] - T0[r, basis] @ T[:m]
        T[r, basis] = 0.0


def _run(T, T0, basis, mc, m, row, allowed, tol_rc, tol_piv, skip_unbounded=False):
    """Pivot on objective ``row`` until a stop is confirmed on a freshly rebuilt tableau.

    Only the first ``mc`` rows take part in ratio tests; all ``m`` constraint
    rows are refactorised.
    """
    allowed = np.array(allowed, dtype=bool)
    total = 0
    while total < _MAX_ITER:
        status, it, e = kernels.simplex_pivot_loop(T, basis, mc, row, allowed, tol_rc, tol_piv, _REFACTOR_EVERY)
        total += it
        if it:
            _refactor(T, T0, basis, m)
        if status == 2 or it:
            continue
        if status == 1 and skip_unbounded:
            allowed[e] = False
            continue
        return status, total, e
    return 2, total, -1


@dataclasses.dataclass
class InequalitySystem:
    """Rows ``A[i] @ t <= c[i]``.

    With ``symmetric=True`` the rows are stored in pairs ``(a, c), (-a, c)``
    at positions ``2i`` and ``2i + 1``.
    """

    A: np.ndarray
    c: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2:
            if self.c.size == 0:
                raise InputError("an empty system needs a (0, n_vars) matrix")
            A = A.reshape(self.c.size, -1)
        if A.shape[0] != self.c.size:
            raise InputError(f"{A.shape[0]} rows but {self.c.size} bounds")
        self.A = A
        if self.symmetric:
            if self.c.size % 2:
                raise InputError("symmetric system needs an even number of rows")
            if not (
                np.allclose(A[0::2], -A[1::2]) and np.allclose(self.c[0::2], self.c[1::2])
            ):
                raise InputError("symmetric rows must come in (a, c), (-a, c) pairs")

    @classmethod
    def from_pairs(cls, A, c):
        """Symmetric system ``|A[i] @ t| <= c[i]``."""
        c = np.asarray(c, dtype=float).reshape(-1)
        A = np.asarray(A, dtype=float).reshape(c.size, -1)
        full = np.empty((2 * c.size, A.shape[1]))
        full[0::2], full[1::2] = A, -A
        return cls(full, np.repeat(c, 2), symmetric=True)

    @property
    def n_vars(self):
        return self.A.shape[1]

    @property
    def n_rows(self):
        return self.c.size

    def pairs(self):
        """``(a, c)`` for each symmetric pair (symmetric systems only)."""
        if not self.symmetric:
            raise InputError("pairs() requires a symmetric system")
        return list(zip(self.A[0::2], self.c[0::2]))

    def contains(self, t, tol=None):
        """Membership of one point or a stack of points (last axis = variables)."""
        tol = get_tolerances().member if tol is None else tol
        t = np.asarray(t, dtype=float)
        viol = t @ self.A.T - self.c
        return np.all(viol <= tol, axis=-1)

    def is_empty(self):
        return not _feasible(self.A, self.c)


def _feasible(A, c):
    if c.size == 0:
        return True
    return solve_dense([np.zeros(A.shape[1])], A, c).optimal


def _infeasible_system(nv, symmetric):
    if symmetric:
        return InequalitySystem(np.zeros((2, nv)), np.array([-1.0, -1.0]), symmetric=True)
    return InequalitySystem(np.zeros((1, nv)), np.array([-1.0]))


def _normalize(A, c):
    """Scale rows to unit max-norm, drop zero rows, keep the tightest of parallel rows.

    Returns ``None`` when a row ``0 <= c`` with ``c < 0`` shows the set is empty.
    """
    tol = get_tolerances()
    s = np.abs(A).max(axis=1, initial=0.0)
    zero = s <= tol.rank
    if np.any(c[zero] < -tol.feas):
        return None
    A, c, s = A[~zero] / s[~zero, None], c[~zero] / s[~zero], None
    index = {}
    rows, bounds = [], []
    for a, b in zip(A, c):
        key = (np.round(a, 9) + 0.0).tobytes()
        if key in index:
            k = index[key]
            bounds[k] = min(bounds[k], b)
        else:
            index[key] = len(rows)
            rows.append(a)
            bounds.append(b)
    return np.asarray(rows).reshape(len(rows), A.shape[1]), np.asarray(bounds, dtype=float)


def _pair_up(A, c):
    """Store a centrally symmetric row set as explicit ``(a, c), (-a, c)`` pairs."""
    tol = get_tolerances()
    A = A.copy()
    if A.shape[0]:
        lead = np.argmax(np.abs(A) > tol.rank, axis=1)
        A[A[np.arange(A.shape[0]), lead] < 0] *= -1.0
    index = {}
    rows, bounds = [], []
    for a, b in zip(A, c):
        key = (np.round(a, 9) + 0.0).tobytes()
        if key in index:
            k = index[key]
            bounds[k] = min(bounds[k], b)
        else:
            index[key] = len(rows)
            rows.append(a)
            bounds.append(b)
    P = np.asarray(rows).reshape(len(rows), A.shape[1])
    full = np.empty((2 * len(rows), A.shape[1]))
    full[0::2], full[1::2] = P, -P
    return full, np.repeat(np.asarray(bounds, dtype=float), 2)


def fm_eliminate(sys, elim):
    """Project ``sys`` onto the variables not listed in ``elim``.

    Fourier-Motzkin, one variable at a time, with normalisation and
    :func:`remove_redundant` after each step. An empty projection is
    returned as the single row ``0 <= -1`` (a pair of them if symmetric).
    """
    elim = sorted({int(v) for v in elim})
    nv = sys.n_vars
    if any(v < 0 or v >= nv for v in elim):
        raise InputError(f"variables {elim} out of range for {nv} variables")
    A, c = sys.A.copy(), sys.c.copy()
    symmetric = sys.symmetric
    cols = list(range(nv))
    for v in elim:
        j = cols.index(v)
        a = A[:, j]
        pos, neg, zer = a > 0, a < 0, a == 0
        Ap, cp = A[pos] / a[pos, None], c[pos] / a[pos]
        An, cn = A[neg] / -a[neg, None], c[neg] / -a[neg]
        A = np.vstack([A[zer], (Ap[:, None, :] + An[None, :, :]).reshape(-1, A.shape[1])])
        c = np.concatenate([c[zer], (cp[:, None] + cn[None, :]).reshape(-1)])
        A = np.delete(A, j, axis=1)
        cols.pop(j)
        out = _normalize(A, c)
        if out is None:
            return _infeasible_system(len(cols), symmetric)
        A, c = out
        if symmetric:
            # combinations of mirrored rows are mirrored, so the set stays symmetric
            A, c = _pair_up(A, c)
        red = remove_redundant(InequalitySystem(A, c, symmetric=symmetric))
        if red.n_rows and not np.any(red.A) and np.any(red.c < 0):
            return _infeasible_system(len(cols), symmetric)
        A, c = red.A, red.c
    return InequalitySystem(A, c, symmetric=symmetric)


def remove_redundant(sys):
    """Drop every row implied by the others (one LP per row).

    An infeasible system collapses to ``0 <= -1``. Symmetric pairs are tested
    and removed together.
    """
    tol = get_tolerances()
    A, c = sys.A, sys.c
    if sys.n_rows == 0:
        return InequalitySystem(A.copy(), c.copy(), sys.symmetric)
    if not _feasible(A, c):
        return _infeasible_system(sys.n_vars, sys.symmetric)
    step = 2 if sys.symmetric else 1
    alive = np.ones(sys.n_rows, dtype=bool)
    for i in range(0, sys.n_rows, step):
        others = alive.copy()
        others[i : i + step] = False
        if np.abs(A[i]).max(initial=0.0) <= tol.rank:
            # 0 <= c_i, and feasibility already rules out c_i < 0
            alive[i : i + step] = False
            continue
        if not others.any():
            continue
        res = solve_dense([-A[i]], A[others], c[others])
        if res.status == UNBOUNDED:
            continue
        if res.status != OPTIMAL:
            raise InternalError("redundancy LP infeasible on a feasible system")
        if -res.value <= c[i] + tol.feas * max(1.0, abs(c[i])):
            alive[i : i + step] = False
    return InequalitySystem(A[alive].copy(), c[alive].copy(), sys.symmetric)


def solve_envelope_qp(c, A, e, x, max_iter=10_000):
    """Evaluate the biconjugate of a max of common-Hessian quadratics at ``x``.

    Maximises ``<x, xi> - |xi|^2 / (4c) - max_y(<a_y, xi> + e_y)`` over ``xi``
    by solving the equivalent simplex-constrained dual
    ``min_lam c|x - A^T lam|^2 - e.lam`` with a Wolfe-style active set.
    The maximiser is ``xi = 2c(x - A^T lam)``.

    Returns ``(xi, value, lam)``.
    """
    tol = get_tolerances()
    c = float(c)
    if not (c > 0 and np.isfinite(c)):
        raise InputError(f"curvature must be positive and finite, got {c}")
    x = np.asarray(x, dtype=float).reshape(-1)
    A = np.asarray(A, dtype=float).reshape(-1, x.size)
    e = np.asarray(e, dtype=float).reshape(-1)
    if A.shape[0] == 0 or e.size != A.shape[0]:
        raise InputError("need at least one affine piece and one offset per piece")
    p = A.shape[0]
    start = int(np.argmin(c * ((x[None, :] - A) ** 2).sum(axis=1) - e))
    S = [start]
    lam = np.zeros(p)
    lam[start] = 1.0
    for _ in range(max_iter):
        xi = 2.0 * c * (x - A.T @ lam)
        ell = A @ xi + e  # minus the dual gradient
        j = int(np.argmax(ell))
        if ell[j] - lam @ ell <= 1e-3 * tol.kkt * max(1.0, float(np.abs(ell).max())):
            break
        if j in S:
            break  # no improving piece outside the support; the KKT check decides
        S = sorted(S + [j])
        lam, S = _minor_cycle(c, A, e, x, lam, S)
    else:
        raise InternalError("envelope QP did not converge")
    xi = 2.0 * c * (x - A.T @ lam)
    ell = A @ xi + e
    gap = float(ell.max() - lam @ ell)
    if gap > tol.kkt * max(1.0, float(np.abs(ell).max())):
        raise InternalError(f"envelope QP KKT residual {gap:.3g} exceeds tolerance")
    corners = 2.0 * c * (x[None, :] - A)
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    pad = (hi - lo) / 2 + 1e-9 * max(1.0, float(np.abs(corners).max()))
    if np.any(xi < lo - pad) or np.any(xi > hi + pad):
        raise InternalError("envelope maximiser left its bounding box")
    value = float(x @ xi - xi @ xi / (4.0 * c) - ell.max())
    return xi, value, lam


def _minor_cycle(c, A, e, x, lam, S):
    """Move to the minimiser on aff(S), stepping back onto the simplex as needed."""
    p = lam.size
    for _ in range(4 * len(S) + 4):
        cur = lam[S]
        target, ray = _affine_min(c, A[S], e[S], x)
        d = ray if target is None else target - cur
        if target is not None and np.all(target > 0):
            lam = np.zeros(p)
            lam[S] = target
            return lam, S
        neg = d < 0
        ratios = np.full(d.size, np.inf)
        ratios[neg] = cur[neg] / -d[neg]
        t = float(ratios.min())
        if target is not None:
            t = min(t, 1.0)
        cur = np.maximum(cur + t * d, 0.0)
        cur[np.argmin(ratios)] = 0.0
        cur /= cur.sum()
        lam = np.zeros(p)
        lam[S] = cur
        S = [s for s, v in zip(S, cur) if v > 0]
    raise InternalError("envelope QP minor cycle did not terminate")


def _affine_min(c, A, e, x):
    """Minimise ``c|x - A^T mu|^2 - e.mu`` over ``sum(mu) = 1``.

    Returns ``(mu, None)`` or, when the objective is unbounded below on the
    affine hull, ``(None, d)`` with ``d`` a descent ray (``sum(d) = 0``).
    """
    k = A.shape[0]
    if k == 1:
        return np.ones(1), None
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = 2.0 * c * (A @ A.T)
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate([2.0 * c * (A @ x) + e, [1.0]])
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    if np.abs(K @ sol - rhs).max() <= 1e-9 * max(1.0, float(np.abs(rhs).max())):
        return sol[:k], None
    M = np.vstack([A.T, np.ones((1, k))])
    _, sv, Vt = np.linalg.svd(M)
    rank = int((sv > 1e-10 * max(1.0, sv.max(initial=0.0))).sum())
    N = Vt[rank:].T
    return None, N @ (N.T @ e)
