"""Seeded random instances for tests and benchmarks."""

import math

import numpy as np

from .geometry import AffineSubspace, orthonormal_rows
from .linsys import SampledSystem
from .metricspace import Modulus, PseudometricSpace, WeightedGraph, full_graph
from .selection import AffineMap
from . import kernels


def max_dist(P):
    P = np.atleast_2d(P)
    return np.abs(P[:, None, :] - P[None, :, :]).max(axis=2)


def random_flat(rng, n, d, through):
    """Random ``d``-dimensional flat in ``R^n`` through ``through``."""
    if d == 0:
        return AffineSubspace.point(np.asarray(through, dtype=float))
    B = orthonormal_rows(rng.normal(size=(d, n)), n)
    return AffineSubspace(np.asarray(through, dtype=float), B)


def random_connected_edges(rng, N, extra=0.3):
    """Random spanning tree plus each remaining pair with probability ``extra``."""
    order = rng.permutation(N)
    edges = set()
    for i in range(1, N):
        a, b = int(order[i]), int(order[rng.integers(0, i)])
        edges.add((min(a, b), max(a, b)))
    for a in range(N):
        for b in range(a + 1, N):
            if (a, b) not in edges and rng.random() < extra:
                edges.add((a, b))
    return sorted(edges)


def _graph_from_weights(N, edges, weights, A=1.0, rho=None):
    W = np.full((N, N), math.inf)
    np.fill_diagonal(W, 0.0)
    for (a, b), w in zip(edges, weights):
        W[a, b] = W[b, a] = w
    sigma = kernels.floyd_warshall(W)
    rho = sigma if rho is None else rho
    return WeightedGraph(N, tuple(edges), tuple(weights), PseudometricSpace(rho, check=False), A)


def scale_graph(g, s):
    """Multiply all weights and the comparison metric by ``s``."""
    return WeightedGraph(
        g.n_vertices,
        g.edges,
        tuple(w * s for w in g.weights),
        g.rho.scaled(s),
        g.A,
        check=False,
    )


def random_cube_instance(rng, n=None, size=None):
    """Cube map with the 2-point hypothesis: all cubes contain one 1-Lipschitz map."""
    n = int(rng.integers(1, 4)) if n is None else n
    size = int(rng.integers(2, 13)) if size is None else size
    pts = rng.uniform(0, 3, size=(size, int(rng.integers(1, 3))))
    D = max_dist(pts)
    # a 1-Lipschitz map: a Lipschitz function of the points, scaled below 1
    f0 = np.stack([np.sin(pts @ rng.normal(size=pts.shape[1])) for _ in range(n)], axis=1)
    lip = (np.abs(f0[:, None, :] - f0[None, :, :]).max(axis=2)[D > 0] / D[D > 0]).max(initial=0.0)
    f0 = f0 / max(lip, 1.0) * rng.uniform(0.5, 1.0)
    kind = rng.choice(3, size=size, p=[0.25, 0.55, 0.2])
    radii = np.where(kind == 0, 0.0, np.where(kind == 1, rng.uniform(0, 1.5, size), math.inf))
    shift = rng.uniform(-1, 1, size=(size, n)) * np.where(np.isfinite(radii), radii, 0.0)[:, None]
    centers = f0 + shift
    return PseudometricSpace(D, check=False), centers, radii


def base_case_instance(rng, A, n=None, N=None):
    """Point-valued map on a graph with factor ``A``; edges satisfy the 2-point bound exactly."""
    n = int(rng.integers(1, 4)) if n is None else n
    N = int(rng.integers(3, 9)) if N is None else N
    q = rng.uniform(0, 2, size=(N, 2))
    edges = random_connected_edges(rng, N, extra=0.2)
    Dq = max_dist(q)
    weights = [max(Dq[a, b], 1e-3) * rng.uniform(1.0, 2.0) for a, b in edges]
    W = np.full((N, N), math.inf)
    np.fill_diagonal(W, 0.0)
    for (a, b), w in zip(edges, weights):
        W[a, b] = W[b, a] = w
    sigma = kernels.floyd_warshall(W)
    rho = np.maximum(sigma / A, A * np.minimum(Dq, sigma))
    rho = kernels.floyd_warshall(rho)  # restore the triangle inequality, stays within the bounds
    g = WeightedGraph(N, tuple(edges), tuple(weights), PseudometricSpace(rho, check=False), float(A))
    P = rng.normal(size=(N, n))
    ratio = max(np.abs(P[a] - P[b]).max() / rho[a, b] for a, b in edges)
    P = P / ratio
    flats = [AffineSubspace.point(p) for p in P]
    return AffineMap(g, flats, k=0)


def random_selection_instance(rng, n=None, k=None, N=None, sparse=None):
    """Flats of dimension ``<= k`` through planted points on a complete or sparse graph (``A = 1``)."""
    n = int(rng.integers(1, 4)) if n is None else n
    k = int(rng.integers(0, min(n, 2) + 1)) if k is None else min(k, n)
    if N is None:
        N = int(rng.integers(2, {0: 9, 1: 9, 2: 7}[k]))
    sparse = bool(rng.random() < 0.4) if sparse is None else sparse
    q = rng.uniform(0, 2, size=(N, 2))
    if sparse:
        edges = random_connected_edges(rng, N, extra=0.3)
        Dq = max_dist(q)
        g = _graph_from_weights(N, edges, [max(Dq[a, b], 0.05) for a, b in edges])
    else:
        D = max_dist(q)
        D = np.where(np.eye(N, dtype=bool), 0.0, np.maximum(D, 0.05))
        g = full_graph(PseudometricSpace(kernels.floyd_warshall(D), check=False))
    planted = rng.normal(size=(N, n))
    dims = rng.integers(0, k + 1, size=N)
    dims[rng.integers(0, N)] = k
    flats = [random_flat(rng, n, int(d), p) for d, p in zip(dims, planted)]
    return AffineMap(g, flats, k=k)


def rescale_instance(am, s):
    return AffineMap(scale_graph(am.graph, s), am.flats, am.k)


def random_jet(rng, n=None, m=None, omega=None):
    """Jet restricted from a random smooth function, with a normalised modulus."""
    from .whitney import Jet1

    n = int(rng.integers(1, 4)) if n is None else n
    m = int(rng.integers(2, 9)) if m is None else m
    X = rng.uniform(-1, 1, size=(m, n))
    H = rng.normal(size=(n, n))
    H = H + H.T
    b = rng.normal(size=n)
    a = rng.normal()
    w = rng.normal(size=n)
    f = a + X @ b + 0.5 * np.einsum("ij,jk,ik->i", X, H, X) + 0.3 * np.sin(X @ w)
    g = b + X @ H + 0.3 * np.cos(X @ w)[:, None] * w
    g = g + rng.normal(scale=0.1, size=g.shape)  # not an exact gradient
    omega = Modulus.capped(float(rng.choice([0.5, 1.0])), 1.0) if omega is None else omega
    return Jet1(X, f, g, omega)


def random_quadratic_jet(rng, n=None, m=None):
    """Restriction of a random quadratic to random points, with ``omega(t) = t``."""
    from .whitney import Jet1

    n = int(rng.integers(1, 4)) if n is None else n
    m = int(rng.integers(2, 7)) if m is None else m
    X = rng.uniform(-1, 1, size=(m, n))
    H = rng.normal(size=(n, n))
    H = H + H.T
    b = rng.normal(size=n)
    a = rng.normal()
    f = a + X @ b + 0.5 * np.einsum("ij,jk,ik->i", X, H, X)
    g = b + X @ H
    return Jet1(X, f, g, Modulus.power(1.0))


def random_lipschitz_data(rng, n=None, m=None, size=None):
    n = int(rng.integers(1, 4)) if n is None else n
    m = int(rng.integers(1, 4)) if m is None else m
    size = int(rng.integers(2, 8)) if size is None else size
    X = rng.uniform(-1, 1, size=(size, n))
    F = np.tanh(X @ rng.normal(size=(n, m))) + 0.2 * rng.normal(size=(size, m))
    return X, F


def planted_system(rng, n=None, N=None, M=None, size=None, omega=None):
    """``A(x) f*(x) = b(x)`` with a smooth planted ``f*``; solution flats have dimension ``<= 1``."""
    n = int(rng.integers(1, 3)) if n is None else n
    M = int(rng.integers(1, 5)) if M is None else M
    N = int(rng.integers(max(M - 1, 1), 5)) if N is None else N
    size = int(rng.integers(2, 11)) if size is None else size
    omega = Modulus.capped(float(rng.choice([0.5, 1.0])), 1.0) if omega is None else omega
    X = rng.uniform(0, 1, size=(size, n))
    C = rng.normal(size=(n, M))
    fstar = 0.5 * np.sin(X @ C)
    A = rng.normal(size=(size, N, M))
    if N >= M and rng.random() < 0.5:
        A[:, -1, :] = A[:, 0, :]  # a dependent row keeps the flats non-trivial
    b = np.einsum("pij,pj->pi", A, fstar)
    return SampledSystem(X, A, b, omega), fstar
