"""Affine flats, max-norm cubes, anchors and slab decompositions."""

import dataclasses
import math

import numpy as np

from .config import get_tolerances
from .errors import InputError, InternalError
from .solvers import InequalitySystem, fm_eliminate, remove_redundant, solve_dense


@dataclasses.dataclass(frozen=True)
class AffineSubspace:
    """``base + span(basis)`` with orthonormal rows in ``basis`` (shape ``(d, n)``)."""

    base: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float).reshape(-1)
        basis = np.asarray(self.basis, dtype=float).reshape(-1, base.size)
        if basis.shape[0] > base.size:
            raise InputError("more directions than ambient dimensions")
        if basis.shape[0]:
            gram = basis @ basis.T
            if np.abs(gram - np.eye(basis.shape[0])).max() > 1e-10:
                raise InputError("basis rows must be orthonormal")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def point(cls, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return cls(x, np.zeros((0, x.size)))

    @classmethod
    def from_spanning(cls, base, directions):
        """Flat through ``base`` spanned by arbitrary (possibly dependent) directions."""
        base = np.asarray(base, dtype=float).reshape(-1)
        return cls(base, orthonormal_rows(directions, base.size))

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def ambient(self):
        return self.base.size

    def project(self, x):
        return project_orthogonal(self, x)

    def residual(self, x):
        """Euclidean distance from ``x`` to the flat."""
        x = np.asarray(x, dtype=float)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=None):
        tol = get_tolerances().member if tol is None else tol
        x = np.asarray(x, dtype=float)
        return self.residual(x) <= tol * max(1.0, float(np.abs(x).max(initial=0.0)))

    def through(self, x):
        """Parallel flat through ``x``."""
        return AffineSubspace(np.asarray(x, dtype=float), self.basis)

    def key(self):
        return self.base.tobytes() + b"|" + self.basis.tobytes()


@dataclasses.dataclass(frozen=True)
class Cube:
    """Max-norm ball ``Q(center, radius)``; ``radius = inf`` is all of R^n."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(-1))
        r = float(self.radius)
        if math.isnan(r) or r < 0:
            raise InputError(f"cube radius must be in [0, inf], got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def lower(self):
        return self.center - self.radius

    @property
    def upper(self):
        return self.center + self.radius

    def contains(self, x, tol=0.0):
        if math.isinf(self.radius):
            return True
        return float(np.abs(np.asarray(x, dtype=float) - self.center).max(initial=0.0)) <= self.radius + tol


@dataclasses.dataclass
class Decomposition:
    """``U1 ∩ slab = ∩_i (U1 ∩ (L_i + Q(r_i)))`` with every ``L_i`` through ``anchor``."""

    anchor: np.ndarray
    pairs: list
    parallel_full_dim: bool = False
    system: InequalitySystem = None

    @property
    def n_pairs(self):
        return len(self.pairs)


def orthonormal_rows(vectors, n, tol=None):
    """Orthonormal basis (rows) of the span of ``vectors``.

    Modified Gram-Schmidt with one re-orthogonalisation pass; a direction
    is discarded when its remaining norm falls below ``tol`` relative to the
    largest input norm.
    """
    tol = get_tolerances().rank if tol is None else tol
    V = np.asarray(vectors, dtype=float).reshape(-1, n)
    scale = max(1.0, float(np.linalg.norm(V, axis=1).max(initial=0.0)))
    out = []
    for v in V:
        w = v.copy()
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        nw = np.linalg.norm(w)
        if nw > tol * scale:
            out.append(w / nw)
    return np.asarray(out).reshape(len(out), n)


def affine_from_points(points):
    """Smallest affine flat containing ``points``."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[0] == 0:
        raise InputError("need a non-empty (m, n) array of points")
    return AffineSubspace(P[0], orthonormal_rows(P[1:] - P[0], P.shape[1]))


def project_orthogonal(A, x):
    """Euclidean projection of ``x`` onto the flat ``A``."""
    x = np.asarray(x, dtype=float)
    if A.dim == 0:
        return np.broadcast_to(A.base, x.shape).copy()
    return A.base + ((x - A.base) @ A.basis.T) @ A.basis


def null_rows(M, tol=None):
    """Orthonormal basis (rows) of the null space of ``M``."""
    tol = get_tolerances().rank if tol is None else tol
    M = np.atleast_2d(np.asarray(M, dtype=float))
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols)
    _, s, Vt = np.linalg.svd(M)
    rank = int((s > tol * max(1.0, float(s.max(initial=0.0)))).sum())
    return Vt[rank:]


def common_directions(B1, B2):
    """Orthonormal basis of ``span(B1) ∩ span(B2)`` (row bases)."""
    n = B1.shape[1]
    if B1.shape[0] == 0 or B2.shape[0] == 0:
        return np.zeros((0, n))
    N = null_rows(np.hstack([B1.T, -B2.T]))
    return orthonormal_rows(N[:, : B1.shape[0]] @ B1, n)


def direction_contained(B1, B2, tol=1e-9):
    """``span(B1) ⊆ span(B2)`` for orthonormal row bases."""
    if B1.shape[0] == 0:
        return True
    if B2.shape[0] < B1.shape[0]:
        return False
    R = B1 - (B1 @ B2.T) @ B2
    return float(np.abs(R).max(initial=0.0)) <= tol


def dist_inf(y, A):
    """Max-norm distance from ``y`` to the flat ``A`` (an LP when ``dim A > 0``)."""
    y = np.asarray(y, dtype=float)
    diff = y - A.base
    if A.dim == 0:
        return float(np.abs(diff).max(initial=0.0))
    d = A.dim
    n = A.ambient
    # min z s.t. |diff - B^T t|_j <= z
    Bt = A.basis.T
    rows = np.vstack([np.hstack([-Bt, -np.ones((n, 1))]), np.hstack([Bt, -np.ones((n, 1))])])
    rhs = np.concatenate([-diff, diff])
    obj = np.zeros(d + 1)
    obj[-1] = 1.0
    res = solve_dense([obj], rows, rhs)
    return float(max(res.x[-1], 0.0))


def nearest_pair(A1, A2):
    """Max-norm closest points ``x1 ∈ A1``, ``x2 ∈ A2`` and their distance.

    Ties are broken first by the l1 length of ``x1 - x2`` and then by the
    lexicographically smallest ``(x1, x2)``. When the flats share directions the pair is only determined up
    to a common shift along them; ``x1`` is then normalised to be orthogonal
    to the shared directions so the lexicographic minimum exists.
    """
    n = A1.ambient
    if A2.ambient != n:
        raise InputError("flats live in different ambient spaces")
    if A1.dim == 0 and A2.dim == 0:
        return A1.base.copy(), A2.base.copy(), float(np.abs(A1.base - A2.base).max(initial=0.0))
    d1, d2 = A1.dim, A2.dim
    # variables: t (d1), s (d2), z, u (n); u_j >= |delta + B1^T t - B2^T s|_j, u_j <= z
    nv = d1 + d2 + 1 + n
    B1t, B2t = A1.basis.T, A2.basis.T
    delta = A1.base - A2.base
    core = np.hstack([B1t, -B2t, np.zeros((n, 1))])
    eye = np.eye(n)
    A_ub = np.vstack(
        [
            np.hstack([core, -eye]),
            np.hstack([-core, -eye]),
            np.hstack([np.zeros((n, d1 + d2)), -np.ones((n, 1)), eye]),
        ]
    )
    b_ub = np.concatenate([-delta, delta, np.zeros(n)])
    W = common_directions(A1.basis, A2.basis)
    A_eq = np.zeros((W.shape[0], nv))
    A_eq[:, :d1] = W @ B1t
    b_eq = -(W @ A1.base)
    z_obj = np.zeros(nv)
    z_obj[d1 + d2] = 1.0
    l1_obj = np.zeros(nv)
    l1_obj[d1 + d2 + 1 :] = 1.0
    objectives = [z_obj, l1_obj]
    for j in range(n):
        o = np.zeros(nv)
        o[:d1] = B1t[j]
        objectives.append(o)
    for j in range(n):
        o = np.zeros(nv)
        o[d1 : d1 + d2] = B2t[j]
        objectives.append(o)
    res = solve_dense(objectives, A_ub, b_ub, A_eq, b_eq)
    if not res.optimal:
        raise InternalError(f"nearest-pair LP ended {res.status}")
    t, s = res.x[:d1], res.x[d1 : d1 + d2]
    x1 = A1.base + B1t @ t
    x2 = A2.base + B2t @ s
    return x1, x2, float(np.abs(x1 - x2).max(initial=0.0))


def _support(a, B1):
    """``max <a, t>`` over ``|B1^T t|_inf <= 1``."""
    d1 = B1.shape[0]
    Bt = B1.T
    res = solve_dense([-a], np.vstack([Bt, -Bt]), np.ones(2 * Bt.shape[0]))
    if not res.optimal:
        raise InternalError(f"support LP ended {res.status}")
    return -res.value


def _direction_dist(u, B2):
    """``min_s |u - B2^T s|_inf``."""
    if B2.shape[0] == 0:
        return float(np.abs(u).max(initial=0.0))
    return dist_inf(u, AffineSubspace(np.zeros(u.size), B2))


def decompose_intersection(U1, U2dir, x1, rho, k=None):
    """Split ``U1 ∩ (x1 + dir U2 + Q(2 rho))`` into face pairs ``(L_i, r_i)``.

    ``U2dir`` is a flat (only its directions are used) or a row basis.
    ``k`` is the recursion level: flats of dimension at most ``k`` are
    allowed, and ``L_i`` must have dimension at most ``k - 1``. It defaults
    to ``dim U1``.
    """
    tol = get_tolerances()
    B1 = U1.basis
    B2 = U2dir.basis if isinstance(U2dir, AffineSubspace) else np.asarray(U2dir, dtype=float).reshape(-1, U1.ambient)
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    scale = max(1.0, float(np.abs(x1).max(initial=0.0)))
    if U1.residual(x1) > 1e-9 * scale:
        raise InputError("anchor does not lie on U1")
    rho = float(rho)
    if rho < 0 or math.isnan(rho):
        raise InputError(f"rho must be >= 0, got {rho}")
    d1 = U1.dim
    k = d1 if k is None else int(k)
    point = AffineSubspace.point(x1)
    if d1 == 0:
        return Decomposition(x1, [(point, 0.0)])

    def contained():
        if d1 <= k - 1:
            return Decomposition(x1, [(U1.through(x1), 0.0)])
        return Decomposition(x1, [(point, math.inf)], parallel_full_dim=True)

    if math.isinf(rho) or direction_contained(B1, B2):
        return contained()
    if d1 == 1:
        u = B1[0]
        dist = _direction_dist(u, B2)
        if dist <= tol.rank:
            return contained()
        r = 2.0 * rho * float(np.abs(u).max()) / dist
        sys1 = InequalitySystem.from_pairs([[1.0]], [2.0 * rho / dist])
        return Decomposition(x1, [(point, r)], system=sys1)
    d2 = B2.shape[0]
    core = np.hstack([B1.T, -B2.T])
    sys = InequalitySystem.from_pairs(core, np.full(core.shape[0], 2.0 * rho))
    if d2:
        sys = fm_eliminate(sys, range(d1, d1 + d2))
    else:
        sys = remove_redundant(sys)
    pairs = []
    for a, c in sys.pairs():
        if np.abs(a).max(initial=0.0) <= tol.rank:
            continue
        h = _support(a, B1)
        N = null_rows(a[None, :])
        L = AffineSubspace(x1, N @ B1)
        pairs.append((L, max(float(c), 0.0) / h))
    if not pairs:
        return contained()
    return Decomposition(x1, pairs, system=sys)


def in_decomposition(dec, y, tol=None):
    """Membership test ``dist_inf(y, L_i) <= r_i`` for all pairs."""
    tol = get_tolerances().member if tol is None else tol
    for L, r in dec.pairs:
        if math.isinf(r):
            continue
        if dist_inf(y, L) > r + tol * max(1.0, r):
            return False
    return True
