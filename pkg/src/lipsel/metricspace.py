"""Finite pseudometric spaces, weighted graphs and moduli of continuity."""

import dataclasses
import itertools
import math

import numpy as np

from . import kernels
from .errors import InputError, InternalError

INF = math.inf


def _check_dist(D, tol):
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InputError("distance matrix must be square")
    if np.isnan(D).any() or (D < 0).any():
        raise InputError("distances must lie in [0, inf]")
    if np.any(np.diag(D) != 0):
        raise InputError("distance matrix must have a zero diagonal")
    if not np.array_equal(D, D.T):
        raise InputError("distance matrix must be symmetric")
    closure = kernels.floyd_warshall(D)
    finite = np.isfinite(D)
    gap = np.where(finite, D - closure, 0.0)
    scale = np.where(finite, np.maximum(1.0, D), 1.0)
    bad = (~finite & np.isfinite(closure)) | (gap > tol * scale)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise InputError(f"triangle inequality fails for points {i} and {j}")


@dataclasses.dataclass(frozen=True)
class PseudometricSpace:
    """Finite extended pseudometric space given by its distance matrix."""

    dist: np.ndarray
    check: dataclasses.InitVar[bool] = True

    def __post_init__(self, check):
        D = np.array(self.dist, dtype=float)
        D.setflags(write=False)
        object.__setattr__(self, "dist", D)
        if check:
            _check_dist(D, 1e-9)

    @property
    def n_points(self):
        return self.dist.shape[0]

    def restrict(self, idx):
        idx = np.asarray(idx, dtype=int)
        return PseudometricSpace(self.dist[np.ix_(idx, idx)], check=False)

    def scaled(self, s):
        return PseudometricSpace(self.dist * float(s), check=False)


@dataclasses.dataclass(frozen=True)
class WeightedGraph:
    """Graph with edge weights, a comparison pseudometric ``rho`` and factor ``A``.

    ``(1/A) rho <= sigma <= A rho`` is verified on construction, where
    ``sigma`` is the shortest-path pseudometric of the weights.
    """

    n_vertices: int
    edges: tuple
    weights: tuple
    rho: PseudometricSpace
    A: float = 1.0
    check: dataclasses.InitVar[bool] = True

    def __post_init__(self, check):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        weights = tuple(float(w) for w in self.weights)
        if len(edges) != len(weights):
            raise InputError("one weight per edge is required")
        seen = set()
        for (i, j), w in zip(edges, weights):
            if i == j:
                raise InputError(f"self-loop at vertex {i}")
            if not (0 <= i < self.n_vertices and 0 <= j < self.n_vertices):
                raise InputError(f"edge ({i}, {j}) out of range")
            if math.isnan(w) or w < 0:
                raise InputError(f"edge ({i}, {j}) has invalid weight {w}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InputError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        if self.rho.n_points != self.n_vertices:
            raise InputError("comparison metric size differs from vertex count")
        if not self.A >= 1:
            raise InputError(f"factor A must be >= 1, got {self.A}")
        if check:
            ok, where = comparison_holds(self)
            if not ok:
                raise InputError(f"(1/A) rho <= sigma <= A rho fails at {where}")

    def weight_matrix(self):
        W = np.full((self.n_vertices, self.n_vertices), INF)
        np.fill_diagonal(W, 0.0)
        for (i, j), w in zip(self.edges, self.weights):
            W[i, j] = W[j, i] = min(W[i, j], w)
        return W

    def adjacency(self):
        adj = np.zeros((self.n_vertices, self.n_vertices), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = True
        return adj

    def ordered_edges(self):
        """Both orientations of every edge, sorted."""
        return sorted(set(self.edges) | {(j, i) for i, j in self.edges})


def path_metric(g):
    """Shortest-path pseudometric ``sigma`` of a weighted graph."""
    D = kernels.floyd_warshall(g.weight_matrix())
    return PseudometricSpace(D, check=False)


def comparison_holds(g, rel_tol=1e-12):
    """Entrywise check of ``(1/A) rho <= sigma <= A rho`` with inf arithmetic."""
    sigma = path_metric(g).dist
    rho = g.rho.dist
    A = float(g.A)
    with np.errstate(invalid="ignore"):
        lo = rho / A
        hi = rho * A
    slack = rel_tol * np.maximum(1.0, np.where(np.isfinite(sigma), sigma, 0.0))
    bad_lo = ~((lo <= sigma + slack) | np.isinf(sigma))
    bad_hi = ~((sigma <= hi + slack) | np.isinf(hi))
    bad = bad_lo | bad_hi
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        return False, (i, j)
    return True, None


def full_graph(space):
    """Complete graph with weights ``rho`` and ``A = 1`` (so ``sigma = rho``)."""
    n = space.n_points
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    weights = [space.dist[i, j] for i, j in edges]
    return WeightedGraph(n, tuple(edges), tuple(weights), space, 1.0, check=False)


def admissible_subsets(g, max_size):
    """Subsets of size ``<= max_size`` that are singletons or induce no isolated vertex.

    Yields sorted tuples, by size and then lexicographically.
    """
    if max_size < 1:
        raise InputError("max_size must be >= 1")
    adj = g.adjacency()
    n = g.n_vertices
    for size in range(1, min(max_size, n) + 1):
        for W in itertools.combinations(range(n), size):
            if size == 1:
                yield W
                continue
            sub = adj[np.ix_(W, W)]
            if sub.any(axis=1).all():
                yield W


def count_subsets(n, max_size):
    return sum(math.comb(n, s) for s in range(1, min(max_size, n) + 1))


_AUDIT_GRID = np.concatenate([[0.0], np.geomspace(2.0**-30, 2.0**10, 999)])


@dataclasses.dataclass(frozen=True)
class Modulus:
    """Modulus of continuity.

    ``power``: ``t**alpha``; ``capped-power``: ``min(cap, t**alpha)``;
    ``tabulated``: piecewise-linear through ``knots`` / ``values`` with
    ``(0, 0)`` as first knot, constant after the last knot.
    """

    kind: str
    alpha: float = 1.0
    cap: float = 1.0
    knots: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power", "capped-power", "tabulated"):
            raise InputError(f"unknown modulus kind {self.kind!r}")
        if self.kind in ("power", "capped-power") and not 0 < self.alpha <= 1:
            raise InputError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.kind == "capped-power" and not self.cap > 0:
            raise InputError("cap must be positive")
        if self.kind == "tabulated":
            t = np.asarray(self.knots, dtype=float)
            w = np.asarray(self.values, dtype=float)
            if t.size < 2 or t.size != w.size or t[0] != 0 or w[0] != 0:
                raise InputError("tabulated modulus needs >= 2 knots starting at (0, 0)")
            if np.any(np.diff(t) <= 0) or np.any(w[1:] <= 0):
                raise InputError("knots must increase and values be positive after 0")
            object.__setattr__(self, "knots", tuple(map(float, t)))
            object.__setattr__(self, "values", tuple(map(float, w)))
        audit = self.audit()
        if not all(audit.values()):
            failed = [k for k, v in audit.items() if not v]
            raise InputError(f"modulus fails audit: {', '.join(failed)}")

    @classmethod
    def power(cls, alpha=1.0):
        return cls("power", alpha=alpha)

    @classmethod
    def capped(cls, alpha=1.0, cap=1.0):
        return cls("capped-power", alpha=alpha, cap=cap)

    @classmethod
    def tabulated(cls, knots, values):
        return cls("tabulated", knots=tuple(knots), values=tuple(values))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            out = np.power(t, self.alpha)
        elif self.kind == "capped-power":
            out = np.minimum(self.cap, np.power(t, self.alpha))
        else:
            out = np.interp(t, self.knots, self.values)
        return out if out.ndim else float(out)

    def audit(self):
        """Grid checks: positivity, monotonicity, midpoint concavity, vanishing at 0."""
        t = _AUDIT_GRID
        w = np.asarray(self(t))
        mid = np.asarray(self((t[:-1] + t[1:]) / 2))
        scale = max(1.0, float(w.max()))
        tiny = 2.0**-30
        if self.kind == "tabulated":
            bound = self.values[1] / self.knots[1] * tiny
        else:
            bound = tiny**self.alpha
        return {
            "positive": bool(np.all(w[1:] > 0)),
            "nondecreasing": bool(np.all(np.diff(w) >= -1e-12 * scale)),
            "concave": bool(np.all(mid >= (w[:-1] + w[1:]) / 2 - 1e-12 * scale)),
            "vanishing": bool(w[0] == 0 and float(self(tiny)) <= bound * (1 + 1e-9)),
        }

    @property
    def normalized(self):
        return float(np.max(self(_AUDIT_GRID))) <= 1.0 and self.kind != "power"

    def to_dict(self):
        if self.kind == "tabulated":
            return {"kind": self.kind, "knots": list(self.knots), "values": list(self.values)}
        d = {"kind": self.kind, "alpha": self.alpha}
        if self.kind == "capped-power":
            d["cap"] = self.cap
        return d

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "kind" not in d:
            raise InputError("modulus must be an object with a 'kind'")
        kind = d["kind"]
        if kind == "tabulated":
            return cls.tabulated(d.get("knots", ()), d.get("values", ()))
        return cls(kind, alpha=float(d.get("alpha", 1.0)), cap=float(d.get("cap", 1.0)))


def normalize_modulus(m):
    """``min(1, omega)``."""
    if m.kind == "power":
        return Modulus.capped(m.alpha, 1.0)
    if m.kind == "capped-power":
        return Modulus.capped(m.alpha, min(1.0, m.cap))
    t = list(m.knots)
    w = list(m.values)
    out_t, out_w = [t[0]], [w[0]]
    for a, b, wa, wb in zip(t[:-1], t[1:], w[:-1], w[1:]):
        if wa < 1.0 < wb:
            out_t.append(a + (1.0 - wa) * (b - a) / (wb - wa))
            out_w.append(1.0)
        out_t.append(b)
        out_w.append(min(1.0, wb))
    res = Modulus.tabulated(out_t, out_w)
    if not np.all(np.asarray(res(_AUDIT_GRID)) <= np.minimum(1.0, m(_AUDIT_GRID)) + 1e-12):
        raise InternalError("normalised modulus exceeds min(1, omega)")
    return res


def holder_seminorm(X, f, omega):
    """``max |f(x) - f(y)| / omega(|x - y|)`` over pairs of sample points (max-norm)."""
    X = np.asarray(X, dtype=float)
    F = np.asarray(f, dtype=float).reshape(X.shape[0], -1)
    if X.shape[0] < 2:
        return 0.0
    i, j = np.triu_indices(X.shape[0], 1)
    t = np.abs(X[i] - X[j]).max(axis=1)
    num = np.abs(F[i] - F[j]).max(axis=1)
    return float((num / np.asarray(omega(t))).max())


def holder_norm(X, f, omega):
    """``sup |f| + holder_seminorm`` on a finite sample."""
    F = np.asarray(f, dtype=float)
    return float(np.abs(F).max(initial=0.0)) + holder_seminorm(X, f, omega)
