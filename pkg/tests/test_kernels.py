import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from lipsel import _kernels_py, kernels

try:
    from lipsel import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = [_kernels_py] + ([_compiled] if _compiled is not None else [])


def _metric(rng, n):
    P = rng.uniform(size=(n, 2))
    return np.abs(P[:, None, :] - P[None, :, :]).max(axis=2)


def _seminorm_reference(P, rho, zero_tol):
    best = 0.0
    for a in range(len(P)):
        for b in range(len(P)):
            if a == b:
                continue
            diff = np.abs(P[a] - P[b]).max()
            if rho[a, b] == np.inf:
                continue
            if rho[a, b] == 0:
                q = 0.0 if diff <= zero_tol else np.inf
            else:
                q = diff / rho[a, b]
            best = max(best, q)
    return best


def test_backend_is_named():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("mod", BACKENDS)
def test_floyd_warshall_matches_reference(mod, rng):
    n = 30
    D = _metric(rng, n)
    W = np.where(rng.random((n, n)) < 0.15, D, np.inf)
    W = np.minimum(W, W.T)
    np.fill_diagonal(W, 0.0)
    ref = shortest_path(np.where(np.isinf(W), 0, W), method="FW", directed=False)
    ref[np.isinf(ref)] = np.inf
    out = mod.floyd_warshall(W.copy())
    np.testing.assert_allclose(out, ref, rtol=1e-12)


@pytest.mark.parametrize("mod", BACKENDS)
def test_minplus_matches_definition(mod, rng):
    b = rng.normal(size=12)
    rho = _metric(rng, 12)
    rho[0, 5] = rho[5, 0] = np.inf
    ref = np.min(b[None, :] + rho, axis=1)
    np.testing.assert_allclose(mod.minplus(b, rho), ref)


@pytest.mark.parametrize("mod", BACKENDS)
def test_seminorm_dense_matches_loops(mod, rng):
    P = rng.normal(size=(15, 3))
    rho = _metric(rng, 15)
    rho[2, 3] = rho[3, 2] = np.inf
    rho[4, 7] = rho[7, 4] = 0.0
    P[7] = P[4]
    val = mod.seminorm_dense(P, rho, 1e-12)[0]
    assert val == pytest.approx(_seminorm_reference(P, rho, 1e-12))
    P[7] += 1e-3
    assert mod.seminorm_dense(P, rho, 1e-12)[0] == np.inf


@pytest.mark.parametrize("mod", BACKENDS)
def test_seminorm_doubled_matches_expanded_metric(mod, rng):
    n, G = 20, 6
    group = rng.integers(0, G, size=n).astype(np.int64)
    r = rng.uniform(0, 0.2, size=n)
    parent = _metric(rng, G)
    P = rng.normal(size=(n, 2))
    rho = parent[np.ix_(group, group)] + r[:, None] + r[None, :]
    np.fill_diagonal(rho, 0.0)
    val = mod.seminorm_doubled(P, group, r, parent, 1e-12)[0]
    assert val == pytest.approx(_seminorm_reference(P, rho, 1e-12))


@pytest.mark.skipif(_compiled is None, reason="extension not built")
def test_pivot_loop_parity():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m, nv = 12, 8
        A = rng.normal(size=(m, nv))
        T = np.zeros((m + 1, nv + m + 1))
        T[:m, :nv] = A
        T[:m, nv : nv + m] = np.eye(m)
        T[:m, -1] = rng.uniform(1, 2, size=m)
        T[m, :nv] = rng.normal(size=nv)
        basis = np.arange(nv, nv + m, dtype=np.int64)
        allowed = np.ones(T.shape[1] - 1, dtype=np.uint8)
        T1, b1, T2, b2 = T.copy(), basis.copy(), T.copy(), basis.copy()
        s1 = _kernels_py.simplex_pivot_loop(T1, b1, m, m, allowed, 1e-10, 1e-11, 10_000)
        s2 = _compiled.simplex_pivot_loop(T2, b2, m, m, allowed, 1e-10, 1e-11, 10_000)
        assert tuple(s1) == tuple(s2)
        np.testing.assert_array_equal(b1, b2)
        np.testing.assert_allclose(T1, T2, rtol=1e-12, atol=1e-12)
