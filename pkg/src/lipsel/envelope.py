"""Explicit C^{1,1} and Kirszbraun extensions through convex envelopes.

Both extensions are gradients (or values) of ``conv(h)`` where ``h`` is the
pointwise minimum of quadratics sharing the Hessian ``2c I``. The envelope
is evaluated as the biconjugate ``h**``; for such families ``h*`` is a
strongly convex piecewise quadratic and ``h**(w)`` is a small QP.
"""

import dataclasses
import math

import numpy as np

from .errors import HypothesisError, InputError
from .metricspace import Modulus
from .solvers import solve_envelope_qp
from .whitney import Jet1, c11_constant, jet_terms

INTERP_TOL = 1e-6


@dataclasses.dataclass(frozen=True)
class QuadraticFamily:
    """``h(w) = min_y c|w|^2 + <beta_y, w> + gamma_y`` (Euclidean norm)."""

    c: float
    betas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        c = float(self.c)
        betas = np.atleast_2d(np.asarray(self.betas, dtype=float))
        gammas = np.asarray(self.gammas, dtype=float).reshape(-1)
        if not (c > 0 and math.isfinite(c)):
            raise InputError(f"curvature must be positive and finite, got {c}")
        if betas.shape[0] == 0 or betas.shape[0] != gammas.size:
            raise InputError("need at least one piece and one offset per piece")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "gammas", gammas)

    @property
    def dim(self):
        return self.betas.shape[1]

    def pieces(self, w):
        w = np.asarray(w, dtype=float)
        return self.c * float(w @ w) + self.betas @ w + self.gammas

    def h(self, w):
        return float(self.pieces(w).min())

    def conjugate(self):
        """``(a, e)`` with ``h*(xi) = |xi|^2/(4c) + max_y(<a_y, xi> + e_y)``."""
        a = -self.betas / (2.0 * self.c)
        e = (self.betas**2).sum(axis=1) / (4.0 * self.c) - self.gammas
        return a, e


def envelope_eval(fam, w):
    """``(conv(h)(w), grad conv(h)(w))``."""
    a, e = fam.conjugate()
    xi, value, _ = solve_envelope_qp(fam.c, a, e, np.asarray(w, dtype=float))
    return value, xi


def _lipschitz_one(jet):
    return Jet1(jet.X, jet.f, jet.g, Modulus.power(1.0))


def jet_c11_seminorm(jet):
    """Seminorm of ``(f, g)`` with ``omega(t) = t``."""
    t = jet_terms(_lipschitz_one(jet))
    return t["taylor"] + t["g_holder"]


def family_from_jet(jet, M):
    """Quadratic family for the C^{1,1} extension with curvature ``c = sqrt(n) M``."""
    M = float(M)
    if not M > 0:
        raise InputError(f"M must be positive, got {M}")
    semi = jet_c11_seminorm(jet)
    if semi > M * (1.0 + 1e-12) + 1e-15:
        raise InputError(f"M = {M:.6g} is below the jet seminorm {semi:.6g}")
    c = math.sqrt(jet.n) * M
    X, f, g = jet.X, jet.f, jet.g
    betas = g - c * X
    gammas = f - np.einsum("ij,ij->i", g, X) + 0.5 * c * (X**2).sum(axis=1)
    return QuadraticFamily(c, betas, gammas)


def extend_c11(jet, M, queries):
    """Values and gradients of the C^{1,1} extension at ``queries``.

    ``F = conv(h) - (c/2)|x|^2`` with ``c = sqrt(n) M``. The two-point
    condition with constant ``c`` is required and checked first; the data
    points are reproduced up to ``1e-6``.

    Returns ``(values, grads)``.
    """
    fam = family_from_jet(jet, M)
    K, where = c11_constant(jet)
    if K > fam.c * (1.0 + 1e-9) + 1e-12:
        raise HypothesisError(
            f"points {where} need curvature {K:.6g} > sqrt(n) M = {fam.c:.6g}",
            subset=list(where),
            stage="c11 two-point condition",
        )
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != jet.n:
        raise InputError("query dimension differs from the data")
    values, grads = _evaluate(fam, Q)
    # interpolation on the data
    dv, dg = _evaluate(fam, jet.X)
    scale = max(1.0, float(np.abs(jet.f).max()), float(np.abs(jet.g).max()))
    err = max(float(np.abs(dv - jet.f).max()), float(np.abs(dg - jet.g).max()))
    if err > INTERP_TOL * scale:
        raise HypothesisError(f"extension misses the data by {err:.3g}", stage="c11 interpolation")
    return values, grads


def _evaluate(fam, Q):
    values = np.empty(Q.shape[0])
    grads = np.empty_like(Q)
    for i, q in enumerate(Q):
        v, xi = envelope_eval(fam, q)
        values[i] = v - 0.5 * fam.c * float(q @ q)
        grads[i] = xi - fam.c * q
    return values, grads


def lipschitz_constant(X, F):
    """Euclidean Lipschitz constant of ``F`` on the sample ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    F = np.asarray(F, dtype=float).reshape(X.shape[0], -1)
    if X.shape[0] < 2:
        return 0.0
    i, j = np.triu_indices(X.shape[0], 1)
    return float((np.linalg.norm(F[i] - F[j], axis=1) / np.linalg.norm(X[i] - X[j], axis=1)).max())


def kirszbraun_family(X, f, M):
    """Family on ``R^{n+m}`` with curvature ``M`` whose envelope gradient gives the extension."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f = np.asarray(f, dtype=float).reshape(X.shape[0], -1)
    M = float(M)
    betas = np.hstack([-M * X, f])
    gammas = 0.5 * M * (X**2).sum(axis=1)
    return QuadraticFamily(M, betas, gammas)


def kirszbraun_extend(X, f, M, queries):
    """``F(x) = grad_y conv(h)(x, 0)``: an ``M``-Lipschitz extension of ``f`` (Euclidean)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f = np.asarray(f, dtype=float).reshape(X.shape[0], -1)
    M = float(M)
    if not M > 0:
        raise InputError(f"M must be positive, got {M}")
    L = lipschitz_constant(X, f)
    if L > M * (1.0 + 1e-12):
        raise InputError(f"M = {M:.6g} is below the Lipschitz constant {L:.6g} of the data")
    fam = kirszbraun_family(X, f, M)
    n, m = X.shape[1], f.shape[1]
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != n:
        raise InputError("query dimension differs from the data")

    def ev(P):
        out = np.empty((P.shape[0], m))
        for i, q in enumerate(P):
            _, xi = envelope_eval(fam, np.concatenate([q, np.zeros(m)]))
            out[i] = xi[n:]
        return out

    data = ev(X)
    err = float(np.abs(data - f).max())
    if err > INTERP_TOL * max(1.0, float(np.abs(f).max())):
        raise HypothesisError(f"extension misses the data by {err:.3g}", stage="kirszbraun interpolation")
    return ev(Q)


def sampled_gradient_lipschitz(points, grads):
    """``max |grad(a) - grad(b)|_inf / |a - b|_inf`` over all sample pairs."""
    P = np.atleast_2d(points)
    G = np.atleast_2d(grads)
    i, j = np.triu_indices(P.shape[0], 1)
    return float((np.abs(G[i] - G[j]).max(axis=1) / np.abs(P[i] - P[j]).max(axis=1)).max())

