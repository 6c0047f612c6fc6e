import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipsel.errors import InputError
from lipsel.metricspace import (
    Modulus,
    PseudometricSpace,
    WeightedGraph,
    admissible_subsets,
    comparison_holds,
    full_graph,
    holder_norm,
    holder_seminorm,
    normalize_modulus,
    path_metric,
)

GRID = np.concatenate([[0.0], np.geomspace(2.0**-30, 2.0**10, 999)])


def _graph(n, edges, weights):
    g0 = WeightedGraph(n, edges, weights, PseudometricSpace(np.zeros((n, n)), check=False), check=False)
    sigma = path_metric(g0).dist
    return WeightedGraph(n, edges, weights, PseudometricSpace(sigma, check=False))


def _random_graph(rng, n):
    edges, weights = [], []
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < 0.5:
            edges.append((i, j))
            weights.append(float(rng.uniform(0.1, 3.0)))
    return _graph(n, edges, weights)


def _paths_min(n, W):
    """Shortest path by enumeration of all simple paths."""
    best = np.full((n, n), math.inf)
    np.fill_diagonal(best, 0.0)
    for a, b in itertools.permutations(range(n), 2):
        others = [v for v in range(n) if v not in (a, b)]
        for r in range(len(others) + 1):
            for mid in itertools.permutations(others, r):
                path = (a,) + mid + (b,)
                cost = sum(W[u, v] for u, v in zip(path[:-1], path[1:]))
                best[a, b] = min(best[a, b], cost)
    return best


# ------------------------------------------------------------ graphs


def test_path_metric_chain():
    g = _graph(3, [(0, 1), (1, 2)], [1.0, 1.0])
    assert path_metric(g).dist[0, 2] == 2.0


def test_path_metric_disconnected():
    g = _graph(2, [], [])
    assert math.isinf(path_metric(g).dist[0, 1])


@pytest.mark.parametrize("seed", range(6))
def test_path_metric_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    g = _random_graph(rng, n)
    np.testing.assert_allclose(path_metric(g).dist, _paths_min(n, g.weight_matrix()))


def test_full_graph_sigma_is_rho(rng):
    P = rng.uniform(size=(6, 2))
    D = np.abs(P[:, None] - P[None]).max(axis=2)
    g = full_graph(PseudometricSpace(D))
    np.testing.assert_allclose(path_metric(g).dist, D)
    assert g.A == 1.0 and comparison_holds(g)[0]


def test_graph_rejects_self_loop_and_duplicates():
    rho = PseudometricSpace(np.zeros((2, 2)))
    with pytest.raises(InputError):
        WeightedGraph(2, [(0, 0)], [1.0], rho, check=False)
    with pytest.raises(InputError):
        WeightedGraph(2, [(0, 1), (1, 0)], [1.0, 1.0], rho, check=False)


def test_graph_comparison_is_enforced():
    rho = PseudometricSpace(np.array([[0.0, 1.0], [1.0, 0.0]]))
    WeightedGraph(2, [(0, 1)], [2.0], rho, A=2.0)
    with pytest.raises(InputError):
        WeightedGraph(2, [(0, 1)], [2.0], rho, A=1.5)


def test_triangle_inequality_checked():
    with pytest.raises(InputError):
        PseudometricSpace(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float))


# -------------------------------------------------------- admissible


def test_admissible_triangle():
    g = _graph(3, [(0, 1), (1, 2), (0, 2)], [1.0, 1.0, 1.0])
    assert sorted(admissible_subsets(g, 2)) == [(0,), (0, 1), (0, 2), (1,), (1, 2), (2,)]


def test_admissible_edgeless():
    g = _graph(2, [], [])
    assert sorted(admissible_subsets(g, 2)) == [(0,), (1,)]


@pytest.mark.parametrize("seed", range(6))
def test_admissible_matches_power_set_filter(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 7))
    g = _random_graph(rng, n)
    size = int(rng.integers(1, n + 1))
    adj = {frozenset(e) for e in g.edges}
    ref = set()
    for mask in range(1, 2**n):
        W = tuple(v for v in range(n) if mask >> v & 1)
        if len(W) > size:
            continue
        if len(W) == 1 or all(any(frozenset((v, w)) in adj for w in W if w != v) for v in W):
            ref.add(W)
    assert set(admissible_subsets(g, size)) == ref


# ---------------------------------------------------------- moduli


def test_modulus_audit_rejects_convex():
    with pytest.raises(InputError):
        Modulus.tabulated([0.0, 1.0, 2.0], [0.0, 1.0, 3.0])


def test_modulus_power_alpha_range():
    with pytest.raises(InputError):
        Modulus.power(1.5)


def test_normalize_identity_modulus():
    w = normalize_modulus(Modulus.power(1.0))
    np.testing.assert_allclose(w(GRID), np.minimum(1.0, GRID))


def test_normalize_leaves_small_modulus_unchanged():
    m = Modulus.tabulated([0.0, 1.0, 4.0], [0.0, 0.5, 0.8])
    np.testing.assert_allclose(normalize_modulus(m)(GRID), m(GRID))


def test_normalize_tabulated_crossing_one():
    m = Modulus.tabulated([0.0, 1.0, 3.0], [0.0, 0.8, 1.6])
    w = normalize_modulus(m)
    np.testing.assert_allclose(w(GRID), np.minimum(1.0, m(GRID)), atol=1e-12)


def test_modulus_round_trip():
    for m in (Modulus.power(0.5), Modulus.capped(0.7, 2.0), Modulus.tabulated([0, 1], [0, 2])):
        assert Modulus.from_dict(m.to_dict()) == m


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_normalized_norm_within_factor_three(seed):
    rng = np.random.default_rng(seed)
    m = [Modulus.power(float(rng.uniform(0.2, 1.0))), Modulus.capped(float(rng.uniform(0.2, 1)), 3.0)][int(rng.integers(2))]
    X = rng.uniform(-3, 3, size=(int(rng.integers(2, 10)), int(rng.integers(1, 4))))
    f = rng.normal(size=X.shape[0]) * rng.uniform(0.01, 10)
    a = holder_norm(X, f, m)
    b = holder_norm(X, f, normalize_modulus(m))
    assert a <= b * (1 + 1e-12)
    assert b <= 3 * a * (1 + 1e-12)


def test_holder_seminorm_two_points():
    X = np.array([[0.0], [4.0]])
    assert holder_seminorm(X, [0.0, 2.0], Modulus.power(0.5)) == pytest.approx(1.0)
