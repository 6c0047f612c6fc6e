"""Whitney jets of class C^{1,omega} on finite sets and their pair-space selections.

A function ``f`` on ``X`` admits a gradient field ``g`` with finite jet norm
exactly when the hyperplane map ``L_f(x, y) = {z : <z, x - y> = f(x) - f(y)}``
on ordered pairs has a Lipschitz selection for the pair metric
``rho_omega``. This module builds that space, converts in both directions
and runs the whole pipeline through :func:`select_affine`.
"""

import dataclasses
import math

import numpy as np

from . import kernels
from .config import get_tolerances
from .errors import HypothesisError, InputError, InternalError
from .geometry import AffineSubspace, null_rows
from .metricspace import (
    Modulus,
    PseudometricSpace,
    WeightedGraph,
    comparison_holds,
    normalize_modulus,
)
from .selection import AffineMap, select_affine

STAR_DISTANCE = 2.0
BOUND_SLACK = 1e-7


def _as_points(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError("points must be an (m, n) array")
    return X


def _check_distinct(X):
    if X.shape[0] > 1:
        i, j = np.triu_indices(X.shape[0], 1)
        same = np.all(X[i] == X[j], axis=1)
        if same.any():
            raise InputError(f"points {int(i[same][0])} and {int(j[same][0])} coincide")


@dataclasses.dataclass
class SampledFunction:
    """Values of a scalar function on distinct points; ``omega`` is stored normalised."""

    X: np.ndarray
    f: np.ndarray
    omega: Modulus

    def __post_init__(self):
        self.X = _as_points(self.X)
        self.f = np.asarray(self.f, dtype=float).reshape(-1)
        if self.f.size != self.X.shape[0]:
            raise InputError("one value per point is required")
        _check_distinct(self.X)
        self.omega = normalize_modulus(self.omega)

    @property
    def n(self):
        return self.X.shape[1]


@dataclasses.dataclass
class Jet1:
    """First-order jet ``(f, g)`` on a finite set, measured with modulus ``omega``."""

    X: np.ndarray
    f: np.ndarray
    g: np.ndarray
    omega: Modulus

    def __post_init__(self):
        self.X = _as_points(self.X)
        m, n = self.X.shape
        self.f = np.asarray(self.f, dtype=float).reshape(-1)
        self.g = np.asarray(self.g, dtype=float).reshape(m, n)
        if self.f.size != m:
            raise InputError("one value per point is required")
        _check_distinct(self.X)

    @property
    def n(self):
        return self.X.shape[1]


def jet_terms(jet):
    """Sup terms and the two seminorm terms of a jet (max-norm throughout)."""
    X, f, g = jet.X, jet.f, jet.g
    m = X.shape[0]
    out = {
        "sup_f": float(np.abs(f).max(initial=0.0)),
        "sup_g": float(np.abs(g).max(initial=0.0)),
        "taylor": 0.0,
        "g_holder": 0.0,
    }
    if m > 1:
        i, j = np.nonzero(~np.eye(m, dtype=bool))
        d = X[i] - X[j]
        t = np.abs(d).max(axis=1)
        w = np.asarray(jet.omega(t))
        # |f(x) - f(y) - <g(y), x - y>| / (|x - y| w(|x - y|))
        defect = np.abs(f[i] - f[j] - np.einsum("ij,ij->i", g[j], d))
        out["taylor"] = float((defect / (t * w)).max())
        out["g_holder"] = float((np.abs(g[i] - g[j]).max(axis=1) / w).max())
    return out


def jet_seminorm(jet):
    """``(norm, seminorm)`` of a jet."""
    t = jet_terms(jet)
    semi = t["taylor"] + t["g_holder"]
    return t["sup_f"] + t["sup_g"] + semi, semi


@dataclasses.dataclass
class PairSpace:
    """Ordered pairs of distinct sample points, optionally with the extra point ``*``.

    ``pairs[p] = (i, j)`` indexes into ``X``; the star, when present, is the
    last vertex.
    """

    pairs: list
    metric: PseudometricSpace
    graph: WeightedGraph
    starred: bool

    @property
    def star(self):
        return len(self.pairs) if self.starred else None


def _pair_list(m):
    return [(i, j) for i in range(m) for j in range(m) if i != j]


def _pair_metric(X, pairs, omega):
    P = np.asarray(pairs)
    wxy = np.asarray(omega(np.abs(X[P[:, 0]] - X[P[:, 1]]).max(axis=1)))
    base = np.abs(X[P[:, 0]][:, None, :] - X[P[:, 0]][None, :, :]).max(axis=2)
    D = wxy[:, None] + wxy[None, :] + np.asarray(omega(base))
    np.fill_diagonal(D, 0.0)
    return D, wxy


def build_pair_space(sf, starred=True):
    """Pair space with metric ``rho_omega`` (plus ``*`` at distance 2) and its graph.

    Pairs sharing a point are joined with weight ``omega(|x-y|) + omega(|x'-y'|)``,
    the star is joined to every pair with weight 2, and ``A = 2``. The
    comparison ``(1/2) rho <= sigma <= 2 rho`` is verified entrywise.
    """
    X = sf.X
    m = X.shape[0]
    if m < 2:
        raise InputError("need at least two points")
    pairs = _pair_list(m)
    D, wxy = _pair_metric(X, pairs, sf.omega)
    P = len(pairs)
    edges, weights = [], []
    for a in range(P):
        for b in range(a + 1, P):
            if set(pairs[a]) & set(pairs[b]):
                edges.append((a, b))
                weights.append(wxy[a] + wxy[b])
    if starred:
        full = np.full((P + 1, P + 1), STAR_DISTANCE)
        full[:P, :P] = D
        full[P, P] = 0.0
        D = full
        for a in range(P):
            edges.append((a, P))
            weights.append(STAR_DISTANCE)
    metric = PseudometricSpace(D, check=False)
    graph = WeightedGraph(D.shape[0], tuple(edges), tuple(weights), metric, 2.0, check=False)
    ok, where = comparison_holds(graph)
    if not ok:
        raise InternalError(f"pair-space graph comparison fails at {where}")
    return PairSpace(pairs, metric, graph, starred)


def build_Lf(sf, pairs=None, starred=True):
    """Hyperplanes ``L_f(x, y)`` for every ordered pair; ``{0}`` for the star."""
    X, f = sf.X, sf.f
    n = X.shape[1]
    pairs = _pair_list(X.shape[0]) if pairs is None else pairs
    flats = []
    for i, j in pairs:
        d = X[i] - X[j]
        base = (f[i] - f[j]) / float(d @ d) * d
        flats.append(AffineSubspace(base, null_rows(d[None, :])))
    if starred:
        flats.append(AffineSubspace.point(np.zeros(n)))
    return flats


def _closest_on_hyperplane(z, X, f, pairs):
    P = np.asarray(pairs)
    d = X[P[:, 0]] - X[P[:, 1]]
    resid = np.einsum("ij,ij->i", z, d) - (f[P[:, 0]] - f[P[:, 1]])
    return z - (resid / np.einsum("ij,ij->i", d, d))[:, None] * d


def selection_from_jet(jet):
    """Selection ``l(x, y)`` = closest point of ``L_f(x, y)`` to ``g(x)`` (Euclidean).

    Returns ``(ell, report)``; ``ell`` is aligned with the ordered pair list.
    The bounds ``sup|l| <= 2 |(f,g)|`` (norm) and ``Lip(l) <= |(f,g)|`` (norm)
    are checked with slack.
    """
    if not jet.omega.normalized:
        raise InputError("selection_from_jet needs a modulus bounded by 1")
    X, f, g = jet.X, jet.f, jet.g
    pairs = _pair_list(X.shape[0])
    P = np.asarray(pairs)
    ell = _closest_on_hyperplane(g[P[:, 0]], X, f, pairs)
    norm, _ = jet_seminorm(jet)
    D, _ = _pair_metric(X, pairs, jet.omega)
    sup_ell = float(np.abs(ell).max(initial=0.0))
    lip, _, _ = kernels.seminorm_dense(ell, D, 0.0)
    report = {
        "norm": norm,
        "sup_ell": sup_ell,
        "lip_ell": float(lip),
        "sup_bound": 2.0 * norm,
        "lip_bound": norm,
    }
    slack = BOUND_SLACK * max(1.0, norm)
    if sup_ell > 2.0 * norm + slack or lip > norm + slack:
        raise InternalError(f"selection bounds violated: {report}")
    return ell, report


def nearest_other(X):
    """For every point, the nearest other point (max-norm; ties to the lexicographically smallest)."""
    m = X.shape[0]
    out = np.empty(m, dtype=int)
    order = np.lexsort(X.T[::-1])  # lexicographic rank of the points
    rank = np.empty(m, dtype=int)
    rank[order] = np.arange(m)
    for i in range(m):
        d = np.abs(X - X[i]).max(axis=1)
        d[i] = np.inf
        cands = np.flatnonzero(d == d.min())
        out[i] = cands[np.argmin(rank[cands])]
    return out


def jet_from_selection(sf, ell):
    """Jet ``g(x) = l(x, x_hat)`` with ``x_hat`` the nearest other point.

    Returns ``(jet, report)``. With ``C_l = sup|l| + Lip(l)`` the checks are
    ``|g| <= C_l``, ``g`` is ``3 Lip(l)``-Hoelder and the Taylor defect is at
    most ``2 n Lip(l) |x - y| omega(|x - y|)``.
    """
    tol = get_tolerances()
    X, f = sf.X, sf.f
    m, n = X.shape
    pairs = _pair_list(m)
    ell = np.asarray(ell, dtype=float).reshape(len(pairs), n)
    P = np.asarray(pairs)
    d = X[P[:, 0]] - X[P[:, 1]]
    resid = np.abs(np.einsum("ij,ij->i", ell, d) - (f[P[:, 0]] - f[P[:, 1]])) / np.linalg.norm(d, axis=1)
    scale = max(1.0, float(np.abs(ell).max(initial=0.0)))
    if np.any(resid > tol.member * scale):
        p = int(np.argmax(resid))
        raise InputError(f"ell is not on L_f at pair {pairs[p]} (residual {resid[p]:.3g})")
    index = {pq: k for k, pq in enumerate(pairs)}
    hat = nearest_other(X)
    g = np.array([ell[index[(i, int(hat[i]))]] for i in range(m)])
    jet = Jet1(X, f, g, sf.omega)
    D, _ = _pair_metric(X, pairs, sf.omega)
    lip, _, _ = kernels.seminorm_dense(ell, D, 0.0)
    lip = float(lip)
    C_ell = float(np.abs(ell).max(initial=0.0)) + lip
    terms = jet_terms(jet)
    report = {
        "lip_ell": lip,
        "C_ell": C_ell,
        "sup_g": terms["sup_g"],
        "g_holder": terms["g_holder"],
        "taylor": terms["taylor"],
        "sup_g_bound": C_ell,
        "g_holder_bound": 3.0 * lip,
        "taylor_bound": 2.0 * n * lip,
    }
    slack = BOUND_SLACK * max(1.0, C_ell)
    for key in ("sup_g", "g_holder", "taylor"):
        if report[key] > report[key + "_bound"] + slack:
            raise InternalError(f"jet bound {key} violated: {report}")
    return jet, report


def _initial_scale(sf):
    X, f = sf.X, sf.f
    i, j = np.triu_indices(X.shape[0], 1)
    ratio = np.abs(f[i] - f[j]) / np.abs(X[i] - X[j]).sum(axis=1)
    return max(1.0, float(ratio.max(initial=0.0)) / STAR_DISTANCE)


def affine_fit(sf):
    """Least-squares affine part ``(g0, c0)`` of the samples, minimal-norm when underdetermined."""
    M = np.hstack([sf.X, np.ones((sf.X.shape[0], 1))])
    coef = np.linalg.lstsq(M, sf.f, rcond=None)[0]
    return coef[:-1], float(coef[-1])


def whitney_select(sf, scale=None, max_doublings=60, detrend=True):
    """Gradient field for ``sf`` via a Lipschitz selection of the starred hyperplane map.

    The jet seminorm ignores affine summands, so with ``detrend`` the
    least-squares affine part is removed first and its gradient added back at
    the end; affine data then comes back exact. The construction is
    homogeneous in ``f``: it runs on ``f / s``. With ``scale=None`` the scale
    ``s`` starts where the star is within reach of every hyperplane and
    doubles whenever a hypothesis check fails. A given ``scale`` is tried once
    and failures propagate. Returns ``(jet, report)`` with the scale, the
    selection constants and the stage diagnostics.
    """
    if scale is not None and not scale > 0:
        raise InputError(f"scale must be positive, got {scale}")
    g0 = np.zeros(sf.n)
    work = sf
    if detrend:
        g0, c0 = affine_fit(sf)
        resid = sf.f - sf.X @ g0 - c0
        if np.abs(resid).max() <= 1e-12 * max(1.0, np.abs(sf.f).max()):
            # exactly affine data: the constant gradient is an exact jet, while the
            # cube stage (upper envelopes) would move off a shared common point
            jet = Jet1(sf.X, sf.f, np.tile(g0, (sf.X.shape[0], 1)), sf.omega)
            norm, semi = jet_seminorm(jet)
            report = {"affine_gradient": g0.tolist(), "scale": None, "exact_affine": True,
                      "jet_norm": norm, "jet_seminorm": semi}
            return jet, report
        work = SampledFunction(sf.X, resid, sf.omega)
    if scale is not None:
        jet, report = _at_scale(work, float(scale))
    else:
        jet, report = _auto_scale(work, max_doublings)
    if detrend:
        jet = Jet1(sf.X, sf.f, jet.g + g0, sf.omega)
        norm, semi = jet_seminorm(jet)
        report.update(affine_gradient=g0.tolist(), jet_norm=norm, jet_seminorm=semi)
    return jet, report


def _auto_scale(sf, max_doublings):
    s = _initial_scale(sf)
    last = None
    for _ in range(max_doublings + 1):
        try:
            return _at_scale(sf, s)
        except HypothesisError as exc:
            last = exc
            s *= 2.0
    raise HypothesisError(f"no selection found up to scale {s:.3g}: {last}", stage="whitney")


def _at_scale(sf, s):
    jet, report = _whitney_select_unit(SampledFunction(sf.X, sf.f / s, sf.omega))
    jet = Jet1(sf.X, sf.f, jet.g * s, sf.omega)
    norm, semi = jet_seminorm(jet)
    report.update(scale=s, jet_norm=norm, jet_seminorm=semi)
    return jet, report


def _whitney_select_unit(sf):
    space = build_pair_space(sf, starred=True)
    flats = build_Lf(sf, space.pairs, starred=True)
    am = AffineMap(space.graph, flats, k=sf.n - 1)
    sel = select_affine(am)
    ell_star = sel.points
    if np.abs(ell_star[space.star]).max() > 0:
        raise InternalError("selection moved the star off the origin")
    ell = ell_star[: space.star]
    jet, jrep = jet_from_selection(sf, ell)
    report = {
        "selection_seminorm": sel.seminorm,
        "stages": sel.diagnostics.get("stages", []),
        **jrep,
    }
    return jet, report


def c11_constant(jet):
    """Smallest ``K`` with the two-point condition of the C^{1,1} envelope extension.

    For every ordered pair ``f(y) >= f(x) + <(g(x)+g(y))/2, y-x> + |g(x)-g(y)|^2/(4K)
    - K |x-y|^2 / 4`` (Euclidean norms). Returns ``(K, (i, j))`` for the
    binding pair.
    """
    X, f, g = jet.X, jet.f, jet.g
    m = X.shape[0]
    best, where = 0.0, None
    for i in range(m):
        for j in range(i + 1, m):
            dx = X[j] - X[i]
            D = f[j] - f[i] - 0.5 * float((g[i] + g[j]) @ dx)
            a2 = float(dx @ dx)
            dg2 = float((g[j] - g[i]) @ (g[j] - g[i]))
            K = (2.0 * abs(D) + math.sqrt(4.0 * D * D + a2 * dg2)) / a2
            if K > best:
                best, where = K, (i, j)
    return best, where
