"""Hoelder-continuous solutions of pointwise linear systems on a finite sample.

At each sample point ``x`` the solutions of ``A(x) f = b(x)`` form a flat in
``R^M``. A Lipschitz selection of that flat-valued map for the metric
``omega(|x - y|)`` is an ``omega``-Hoelder solution.
"""

import dataclasses

import numpy as np

from .config import get_tolerances
from .errors import InfeasibleSystemError, InputError, InternalError
from .geometry import AffineSubspace
from .metricspace import Modulus, PseudometricSpace, full_graph
from .selection import AffineMap, select_affine


@dataclasses.dataclass
class SampledSystem:
    """Matrices ``A[p]`` (``N x M``) and right-hand sides ``b[p]`` at points ``X[p]``."""

    X: np.ndarray
    A: np.ndarray
    b: np.ndarray
    omega: Modulus

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        m = self.X.shape[0]
        if self.A.ndim != 3 or self.A.shape[0] != m:
            raise InputError("A must hold one N x M matrix per point")
        if self.b.shape != self.A.shape[:2]:
            raise InputError("b must hold one N-vector per point")
        if m > 1:
            i, j = np.triu_indices(m, 1)
            same = np.all(self.X[i] == self.X[j], axis=1)
            if same.any():
                raise InputError(f"points {int(i[same][0])} and {int(j[same][0])} coincide")

    @property
    def n_unknowns(self):
        return self.A.shape[2]

    def metric(self):
        X = self.X
        D = np.asarray(self.omega(np.abs(X[:, None, :] - X[None, :, :]).max(axis=2)))
        np.fill_diagonal(D, 0.0)
        return PseudometricSpace(D, check=False)


def solution_flat(A, b, point=None):
    """Solution set of ``A f = b``: minimum-norm solution plus an orthonormal null-space basis."""
    tol = get_tolerances()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != A.shape[0]:
        raise InputError("b must have one entry per row of A")
    M = A.shape[1]
    U, s, Vt = np.linalg.svd(A, full_matrices=True)
    rank = int((s > tol.rank * max(1.0, s.max(initial=0.0))).sum())
    coef = (U[:, :rank].T @ b) / s[:rank]
    base = Vt[:rank].T @ coef
    resid = float(np.abs(A @ base - b).max(initial=0.0))
    if resid > tol.member * max(1.0, float(np.abs(b).max(initial=0.0))):
        where = "" if point is None else f" at point {point}"
        raise InfeasibleSystemError(
            f"inconsistent system{where} (residual {resid:.3g})",
            subset=None if point is None else [int(point)],
            stage="solution flat",
        )
    return AffineSubspace(base if M else np.zeros(0), Vt[rank:].copy())


def solve_holder_system(system):
    """``(g, seminorm, selection)`` with ``A(x) g(x) = b(x)`` and ``g`` Hoelder for ``omega``."""
    tol = get_tolerances()
    flats = [solution_flat(A, b, point=p) for p, (A, b) in enumerate(zip(system.A, system.b))]
    graph = full_graph(system.metric())
    am = AffineMap(graph, flats, k=system.n_unknowns)
    sel = select_affine(am)
    g = sel.points
    resid = np.abs(np.einsum("pij,pj->pi", system.A, g) - system.b).max(initial=0.0)
    scale = max(1.0, float(np.abs(system.b).max(initial=0.0)))
    if resid > tol.member * scale:
        raise InternalError(f"selection residual {resid:.3g} exceeds tolerance")
    return g, sel.seminorm, sel
