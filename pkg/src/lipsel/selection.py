"""Lipschitz selections of cube-valued and affine-set-valued maps.

``select_cube`` is the coordinatewise inf-convolution construction.
``select_affine`` follows the induction on the flat dimension: anchor
points on every edge, slab decompositions into face pairs ``(L_i, r_i)``,
a recursive selection on the doubled space of those faces, a cube stage
whose value depends only on the first vertex of each edge, and a final
orthogonal projection back onto the flats.
"""

import dataclasses
import math

import numpy as np

from . import kernels
from .config import get_tolerances
from .errors import HypothesisError, InputError, NoSelectionAtEdge
from .geometry import AffineSubspace, Cube, decompose_intersection, nearest_pair, project_orthogonal
from .metricspace import PseudometricSpace, WeightedGraph

ANCHOR_REL_TOL = 1e-7


@dataclasses.dataclass
class CubeMap:
    """One max-norm cube per point of a pseudometric space."""

    space: PseudometricSpace
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float).reshape(-1)
        self.centers = np.asarray(self.centers, dtype=float).reshape(self.radii.size, -1)
        if self.radii.size != self.space.n_points:
            raise InputError("one cube per point is required")
        if np.isnan(self.radii).any() or (self.radii < 0).any():
            raise InputError("radii must lie in [0, inf]")
        if not np.isfinite(self.centers).all():
            raise InputError("cube centers must be finite")

    @classmethod
    def from_cubes(cls, space, cubes):
        return cls(space, np.array([q.center for q in cubes]), np.array([q.radius for q in cubes]))

    def cube(self, i):
        return Cube(self.centers[i], self.radii[i])


@dataclasses.dataclass
class AffineMap:
    """Flat-valued map on the vertices of a weighted graph; flats have dim <= k."""

    graph: WeightedGraph
    flats: list
    k: int

    def __post_init__(self):
        self.flats = list(self.flats)
        if len(self.flats) != self.graph.n_vertices:
            raise InputError("one flat per vertex is required")
        if self.k < 0:
            raise InputError("k must be >= 0")
        n = {F.ambient for F in self.flats}
        if len(n) > 1:
            raise InputError("flats live in different ambient spaces")
        for v, F in enumerate(self.flats):
            if F.dim > self.k:
                raise InputError(f"flat at vertex {v} has dimension {F.dim} > k = {self.k}")

    @property
    def ambient(self):
        return self.flats[0].ambient

    @property
    def rho(self):
        return self.graph.rho.dist


@dataclasses.dataclass
class Selection:
    points: np.ndarray
    seminorm: float
    diagnostics: dict = dataclasses.field(default_factory=dict)


def _zero_tol(points):
    return get_tolerances().member * max(1.0, float(np.abs(points).max(initial=0.0)))


def lipschitz_seminorm(points, rho):
    """``max ||f(v) - f(v')||_inf / rho(v, v')``; ``0/0 = 0``, ``x/0 = inf`` for ``x > 0``."""
    P = np.asarray(points, dtype=float)
    P = P.reshape(P.shape[0], -1)
    if P.shape[0] < 2:
        return 0.0
    value, _, _ = kernels.seminorm_dense(P, np.asarray(rho, dtype=float), _zero_tol(P))
    return float(value)


def _interval_select(lower, upper, rho, labels=None, stage=None):
    """Coordinatewise selection for intervals ``[lower, upper]`` with 1-Lipschitz bound.

    ``rho`` must be a pseudometric (inf allowed). Raises when some pair violates
    ``lower(u) - upper(u') <= rho(u, u')``.
    """
    tol = get_tolerances()
    N, n = lower.shape
    finite = np.isfinite(np.concatenate([lower.ravel(), upper.ravel()]))
    vals = np.concatenate([lower.ravel(), upper.ravel()])[finite]
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    slack = tol.member * scale
    out = np.zeros((N, n))
    for j in range(n):
        a, b = lower[:, j], upper[:, j]
        with np.errstate(invalid="ignore"):
            gap = a[:, None] - b[None, :] - rho
        gap[np.isnan(gap)] = -np.inf  # inf - inf: unbounded interval or infinite distance
        bad = gap > slack * (1.0 + np.where(np.isfinite(rho), rho, 0.0) / scale)
        if bad.any():
            u, w = map(int, np.argwhere(bad)[0])
            names = (labels[u], labels[w]) if labels is not None else (u, w)
            raise HypothesisError(
                f"cubes at {names[0]} and {names[1]} are more than rho apart in coordinate {j} "
                f"(gap {gap[u, w]:.6g})",
                subset=list(names),
                stage=stage,
            )
        bounded = np.isfinite(b)
        if not bounded.any():
            continue
        idx = np.flatnonzero(bounded)
        f0 = kernels.minplus(b[idx], rho[np.ix_(idx, idx)])
        col = np.zeros(N)
        col[idx] = f0
        rest = np.flatnonzero(~bounded)
        if rest.size:
            ext = kernels.minplus(f0, rho[np.ix_(rest, idx)])
            col[rest] = np.where(np.isfinite(ext), ext, 0.0)
        # rounding can leave the value a hair outside the interval
        col = np.minimum(np.maximum(col, np.where(np.isfinite(a), a, -np.inf)), b)
        out[:, j] = col
    return out


def select_cube(cm):
    """1-Lipschitz selection of a cube-valued map satisfying the two-point condition."""
    lower = cm.centers - cm.radii[:, None]
    upper = cm.centers + cm.radii[:, None]
    rho = cm.space.dist
    points = _interval_select(lower, upper, rho, stage="cube")
    return Selection(points, lipschitz_seminorm(points, rho), {"n_points": cm.space.n_points})


def select_cube_grouped(centers, radii, group, rho_groups, stage="cube"):
    """Cube selection when the metric only depends on a group label.

    Points in one group are at distance 0, so their cubes are intersected
    first and a single value is chosen per group. Returns one point per
    group index in ``range(rho_groups.shape[0])``; groups without members
    get 0.
    """
    tol = get_tolerances()
    G = rho_groups.shape[0]
    n = centers.shape[1]
    lower = np.full((G, n), -np.inf)
    upper = np.full((G, n), np.inf)
    lo = centers - radii[:, None]
    hi = centers + radii[:, None]
    np.maximum.at(lower, group, lo)
    np.minimum.at(upper, group, hi)
    present = np.zeros(G, dtype=bool)
    present[group] = True
    finite = np.concatenate([lo[np.isfinite(lo)], hi[np.isfinite(hi)]])
    scale = max(1.0, float(np.abs(finite).max(initial=0.0)))
    clash = present[:, None] & (lower > upper + tol.member * scale)
    if clash.any():
        u, j = map(int, np.argwhere(clash)[0])
        raise HypothesisError(
            f"cubes sharing vertex {u} do not intersect in coordinate {j}", subset=[u], stage=stage
        )
    # tolerance-level clashes: collapse to the midpoint
    inverted = lower > upper
    if inverted.any():
        mid = (lower[inverted] + upper[inverted]) / 2
        lower[inverted] = mid
        upper[inverted] = mid
    idx = np.flatnonzero(present)
    out = np.zeros((G, n))
    out[idx] = _interval_select(lower[idx], upper[idx], rho_groups[np.ix_(idx, idx)], labels=idx, stage=stage)
    return out, present


def select_affine(am, record_stage=True):
    """Lipschitz selection of the flat-valued map ``am``.

    The diagnostics hold one record per recursion level under ``"stages"``.
    With ``record_stage`` the top level also stores the cube-stage data
    (``"hat_f"``, ``"K_radius"``, ``"stage_data"``) used by
    :func:`validate_selection`.
    """
    flats = am.flats
    rho = np.asarray(am.rho, dtype=float)
    edges = am.graph.ordered_edges()
    stages = []
    top = {}
    points = _select(flats, rho, edges, stages, top if record_stage else None, depth=0)
    sem = lipschitz_seminorm(points, rho)
    diag = {"stages": stages, "k": am.k, "A": float(am.graph.A)}
    diag.update(top)
    return Selection(points, sem, diag)


def _anchor_slack(rho_e, x1, x2):
    scale = max(1.0, float(np.abs(x1).max(initial=0.0)), float(np.abs(x2).max(initial=0.0)))
    return ANCHOR_REL_TOL * (rho_e + scale)


def _select(flats, rho, edges, stages, top, depth):
    N = len(flats)
    n = flats[0].ambient
    k_eff = max(F.dim for F in flats)
    if k_eff == 0:
        stages.append({"depth": depth, "k": 0, "n_vertices": N, "n_edges": len(edges)})
        return np.array([F.base for F in flats]).reshape(N, n)

    # anchors and face pairs for every ordered edge
    anchors = {}
    elements = []  # (v1, v2, L, r, parallel, x1)
    max_pairs = 0
    for v1, v2 in edges:
        r12 = rho[v1, v2]
        if (v2, v1) in anchors:
            x2, x1, d = anchors[(v2, v1)]
        else:
            x1, x2, d = nearest_pair(flats[v1], flats[v2])
        anchors[(v1, v2)] = (x1, x2, d)
        if d > r12 + _anchor_slack(r12, x1, x2):
            raise NoSelectionAtEdge(
                f"flats at {v1} and {v2} are {d:.6g} apart but rho = {r12:.6g}",
                subset=[v1, v2],
                stage=f"depth {depth} anchors",
            )
        dec = decompose_intersection(flats[v1], flats[v2], x1, r12, k=k_eff)
        max_pairs = max(max_pairs, dec.n_pairs)
        for L, r in dec.pairs:
            elements.append((v1, v2, L, r, dec.parallel_full_dim, x1))

    # the doubled space: deduplicate non-parallel elements
    uid = np.full(len(elements), -1)
    keys = {}
    uniq = []
    for e, (v1, v2, L, r, par, x1) in enumerate(elements):
        if par:
            continue
        key = (v1, L.key(), r)
        if key not in keys:
            keys[key] = len(uniq)
            uniq.append(e)
        uid[e] = keys[key]
    u_group = np.array([elements[e][0] for e in uniq], dtype=np.int64)
    u_r = np.array([elements[e][3] for e in uniq], dtype=float)
    u_flats = [elements[e][2] for e in uniq]
    n_par = int(sum(1 for el in elements if el[4]))

    record = {
        "depth": depth,
        "k": k_eff,
        "n_vertices": N,
        "n_edges": len(edges),
        "n_elements": len(elements),
        "n_unique": len(uniq),
        "n_parallel": n_par,
        "max_pairs": max_pairs,
    }
    stages.append(record)

    if uniq:
        M = len(uniq)
        if k_eff - 1 >= 1:
            rho_bar = rho[np.ix_(u_group, u_group)] + u_r[:, None] + u_r[None, :]
            np.fill_diagonal(rho_bar, 0.0)
            sub_edges = [(a, b) for a in range(M) for b in range(M) if a != b and np.isfinite(rho_bar[a, b])]
        else:
            rho_bar = None  # the base level needs no edges
            sub_edges = []
        f_bar0 = _select(u_flats, rho_bar, sub_edges, stages, None, depth + 1)
        if M > 1:
            sem, i, j = kernels.seminorm_doubled(f_bar0, u_group, u_r, rho, _zero_tol(f_bar0))
        else:
            sem = 0.0
        if not math.isfinite(sem):
            raise HypothesisError(
                "recursive selection separates faces at zero distance",
                subset=[int(u_group[i]), int(u_group[j])],
                stage=f"depth {depth} doubling",
            )
        C = max(1.0, float(sem))
    else:
        f_bar0 = np.zeros((0, n))
        C = 1.0
    record["C"] = C
    record["lambda"] = (1.0 + math.sqrt(n)) * C

    # cube stage on the first-vertex groups
    centers = np.empty((len(elements), n))
    radii = np.empty(len(elements))
    group = np.empty(len(elements), dtype=np.int64)
    for e, (v1, v2, L, r, par, x1) in enumerate(elements):
        group[e] = v1
        if par:
            centers[e] = x1
            radii[e] = math.inf
        else:
            centers[e] = f_bar0[uid[e]]
            radii[e] = C * r
    if elements:
        with np.errstate(invalid="ignore"):
            rho_hat = C * rho
        hat_f, present = select_cube_grouped(centers, radii, group, rho_hat, stage=f"depth {depth} cube")
    else:
        hat_f, present = np.zeros((N, n)), np.zeros(N, dtype=bool)
    points = np.array([project_orthogonal(flats[v], hat_f[v]) for v in range(N)]).reshape(N, n)

    if top is not None:
        K_radius = np.full(N, math.inf)
        for v1, v2, L, r, par, x1 in elements:
            K_radius[v1] = min(K_radius[v1], r)
        top.update(
            hat_f=hat_f,
            K_radius=K_radius,
            C=C,
            lam=record["lambda"],
            stage_data={
                "centers": centers,
                "radii": radii,
                "group": group,
                "edges": [(el[0], el[1]) for el in elements],
            },
            anchors={k: (v[0], v[1]) for k, v in anchors.items()},
        )
    return points


def validate_selection(am, s, tol=None):
    """Report on a selection: membership, seminorm, and the stage-level bounds."""
    tol = get_tolerances().member if tol is None else tol
    P = np.asarray(s.points, dtype=float)
    resid = np.array([F.residual(p) for F, p in zip(am.flats, P)])
    scale = np.maximum(1.0, np.abs(P).max(axis=1, initial=0.0))
    rho = am.rho
    sem = lipschitz_seminorm(P, rho)
    n = am.ambient
    A = float(am.graph.A)
    report = {
        "membership_residual": float(resid.max(initial=0.0)),
        "membership_ok": bool(np.all(resid <= tol * scale)),
        "bad_vertices": [int(v) for v in np.flatnonzero(resid > tol * scale)],
        "seminorm": sem,
        "seminorm_finite": bool(math.isfinite(sem)),
    }
    if max(F.dim for F in am.flats) == 0:
        report["base_case_bound"] = A * A
        report["base_case_ok"] = bool(sem <= A * A + 1e-9)
    diag = s.diagnostics or {}
    if "hat_f" in diag:
        lam = diag["lam"]
        hat_f = np.asarray(diag["hat_f"])
        Kr = np.asarray(diag["K_radius"])
        slack = np.abs(hat_f - P).max(axis=1, initial=0.0) - lam * Kr
        finite = np.isfinite(Kr)
        worst = float(np.max(slack[finite] / np.maximum(1.0, lam * Kr[finite]), initial=-np.inf))
        report["cube_lambda"] = lam
        report["cube_bound_ok"] = bool(worst <= tol)
        report["cube_bound_worst"] = worst
        report["edge_radius"] = {
            f"{v}-{w}": 4.0 * n * lam * lam * float(rho[v, w]) for v, w in am.graph.ordered_edges()
        }
    report["ok"] = report["membership_ok"] and report["seminorm_finite"] and report.get("cube_bound_ok", True)
    return report
