import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from lipsel.errors import InputError
from lipsel.solvers import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    InequalitySystem,
    LinearProgram,
    fm_eliminate,
    remove_redundant,
    solve_dense,
    solve_envelope_qp,
    solve_lp,
)


# ---------------------------------------------------------------- LP


def test_lp_single_bound():
    res = solve_lp(LinearProgram([1.0], [([1.0], ">=", 1.0)], 1))
    assert res.status == OPTIMAL
    assert res.x[0] == pytest.approx(1.0)
    assert res.value == pytest.approx(1.0)


def test_lp_contradictory_bounds():
    res = solve_lp(LinearProgram([0.0], [([1.0], "<=", -1.0), ([1.0], ">=", 1.0)], 1))
    assert res.status == INFEASIBLE


def test_lp_unbounded_ray():
    res = solve_lp(LinearProgram([-1.0], [([1.0], ">=", 0.0)], 1))
    assert res.status == UNBOUNDED


def test_lp_dimension_mismatch():
    with pytest.raises(InputError):
        LinearProgram([1.0, 2.0], [([1.0], "<=", 1.0)], 2)
    with pytest.raises(InputError):
        LinearProgram([1.0], [], 2)


def test_lp_zero_row_equality_is_infeasible():
    assert solve_dense([[1.0]], A_eq=[[0.0]], b_eq=[1.0]).status == INFEASIBLE


def test_lp_lexicographic_stage():
    # min x0 + x1 over x0 + x1 >= 1, x >= 0; then min x0 on that face -> (0, 1)
    A = [[-1.0, -1.0], [-1.0, 0.0], [0.0, -1.0]]
    b = [-1.0, 0.0, 0.0]
    res = solve_dense([[1.0, 1.0], [1.0, 0.0]], A, b)
    assert res.optimal
    np.testing.assert_allclose(res.x, [0.0, 1.0], atol=1e-12)


def _random_lp(rng):
    nv = int(rng.integers(1, 21))
    m = int(rng.integers(1, 61))
    A = rng.normal(size=(m, nv))
    x0 = rng.normal(size=nv)
    b = A @ x0 + rng.uniform(0, 1, size=m)  # x0 is feasible
    c = rng.normal(size=nv)
    return A, b, c


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lp_optimal_points_are_feasible(seed):
    A, b, c = _random_lp(np.random.default_rng(seed))
    res = solve_dense([c], A, b)
    if res.optimal:
        assert np.max(A @ res.x - b) <= 1e-9 * max(1.0, np.abs(b).max())
        assert res.value == pytest.approx(c @ res.x)


def test_lp_agrees_with_reference_solver():
    rng = np.random.default_rng(11)
    for _ in range(150):
        nv = int(rng.integers(1, 8))
        m1, m2 = int(rng.integers(0, 10)), int(rng.integers(0, 4))
        A, b = rng.normal(size=(m1, nv)), 2 * rng.normal(size=m1)
        Ae, be = rng.normal(size=(m2, nv)), rng.normal(size=m2)
        c = rng.normal(size=nv)
        args = (A if m1 else None, b if m1 else None, Ae if m2 else None, be if m2 else None)
        ours = solve_dense([c], *args)
        ref = linprog(c, *args, bounds=[(None, None)] * nv)
        status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}[ref.status]
        assert ours.status == status
        if status == OPTIMAL:
            assert ours.value == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)


def test_lp_degenerate_integer_data_agrees_with_reference():
    # small integer coefficients give many ties in the ratio test
    rng = np.random.default_rng(23)
    for t in range(300):
        nv = int(rng.integers(1, 9))
        m1, m2 = int(rng.integers(0, 20)), int(rng.integers(0, min(nv, 4) + 1))
        A = rng.integers(-2, 3, size=(m1, nv)).astype(float)
        x0 = rng.integers(0, 3, size=nv).astype(float)
        b = A @ x0 + rng.integers(0, 2, size=m1)
        A = np.vstack([A, np.eye(nv), -np.eye(nv)])
        b = np.concatenate([b, x0 + 3, 3 - x0])
        Ae = rng.integers(-1, 2, size=(m2, nv)).astype(float)
        be = Ae @ x0
        c = rng.integers(-2, 3, size=nv).astype(float)
        nonneg = t % 4 == 0
        args = (A, b, Ae if m2 else None, be if m2 else None)
        ours = solve_dense([c], *args, nonneg=nonneg)
        ref = linprog(c, *args, bounds=[(0, None) if nonneg else (None, None)] * nv)
        assert ours.status == {0: OPTIMAL, 2: INFEASIBLE}[ref.status]
        if ours.optimal:
            assert ours.value == pytest.approx(ref.fun, rel=1e-9, abs=1e-9)
            assert np.max(A @ ours.x - b) <= 1e-9


def test_lp_many_free_variables_and_degenerate_rows():
    # jet-norm style LP: free gradients, many rows through the same vertex
    rng = np.random.default_rng(276)
    for _ in range(40):
        m, n = int(rng.integers(3, 7)), int(rng.integers(1, 4))
        X = rng.uniform(-1, 1, size=(m, n))
        f = np.sin(X @ rng.normal(size=n) * 3) + (X**2).sum(1)
        rows, rhs = [], []
        nv = m * n + 2
        for x in range(m):
            for y in range(m):
                if x == y:
                    continue
                d = X[x] - X[y]
                t = np.abs(d).max()
                for sgn in (1.0, -1.0):
                    r = np.zeros(nv)
                    r[y * n : (y + 1) * n] = sgn * d
                    r[-2] = -t * t
                    rows.append(r)
                    rhs.append(sgn * (f[x] - f[y]))
                for k in range(n):
                    for sgn in (1.0, -1.0):
                        r = np.zeros(nv)
                        r[x * n + k] = sgn
                        r[y * n + k] = -sgn
                        r[-1] = -t
                        rows.append(r)
                        rhs.append(0.0)
        c = np.zeros(nv)
        c[-2:] = 1.0
        ours = solve_dense([c], np.array(rows), np.array(rhs))
        ref = linprog(c, np.array(rows), np.array(rhs), bounds=[(None, None)] * nv)
        assert ours.optimal
        assert ours.value == pytest.approx(ref.fun, rel=1e-9)


def test_lp_is_deterministic():
    A, b, c = _random_lp(np.random.default_rng(5))
    r1, r2 = solve_dense([c], A, b), solve_dense([c], A, b)
    assert r1.status == r2.status
    if r1.optimal:
        assert np.array_equal(r1.x, r2.x)


# ------------------------------------------------------ Fourier-Motzkin


def test_fm_interval_sum():
    # |t - s| <= 1, |s| <= 1; eliminate s -> |t| <= 2
    sys = InequalitySystem.from_pairs([[1.0, -1.0], [0.0, 1.0]], [1.0, 1.0])
    out = fm_eliminate(sys, [1])
    assert out.symmetric
    (a, c), = out.pairs()
    assert abs(a[0]) == pytest.approx(1.0)
    assert c == pytest.approx(2.0)


def test_fm_single_combination():
    sys = InequalitySystem(np.array([[1.0, 1.0], [0.0, -1.0]]), np.array([0.0, 0.0]))
    out = fm_eliminate(sys, [1])
    assert out.n_rows == 1
    assert out.A[0, 0] > 0
    assert out.c[0] / out.A[0, 0] == pytest.approx(0.0)


def test_fm_slab_sliced_by_orthogonal_line():
    # U2 = span(e1) in R^2 with half-thickness 2, U1 = span(e2): points (0, t);
    # rows |t e2 - s e1|_j <= 2 -> |s| <= 2, |t| <= 2
    sys = InequalitySystem.from_pairs([[0.0, -1.0], [1.0, 0.0]], [2.0, 2.0])
    out = fm_eliminate(sys, [1])
    grid = np.linspace(-4, 4, 161)[:, None]
    # reference: the slab contains (0, t) iff |t| <= 2 (second coordinate)
    inside = np.abs(grid[:, 0]) <= 2 + 1e-12
    assert np.array_equal(out.contains(grid, tol=1e-12), inside)


def test_fm_empty_projection():
    sys = InequalitySystem(np.array([[0.0, 1.0], [0.0, -1.0]]), np.array([-1.0, -1.0]))
    out = fm_eliminate(sys, [1])
    assert out.is_empty()


def test_fm_rejects_bad_index():
    with pytest.raises(InputError):
        fm_eliminate(InequalitySystem(np.eye(2), np.ones(2)), [5])


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fm_projection_is_exact(seed):
    rng = np.random.default_rng(seed)
    nv = int(rng.integers(2, 4))
    m = int(rng.integers(3, 9))
    A = rng.normal(size=(m, nv))
    c = rng.uniform(0.2, 1.5, size=m)
    # box rows keep the eliminated variable bounded
    A = np.vstack([A, np.eye(nv), -np.eye(nv)])
    c = np.concatenate([c, 2 * np.ones(2 * nv)])
    sys = InequalitySystem(A, c)
    out = fm_eliminate(sys, [nv - 1])
    pts = rng.uniform(-2.5, 2.5, size=(60, nv - 1))
    for t in pts:
        # does some s extend t into the original polyhedron? decided by an LP
        res = solve_lp(LinearProgram([0.0], [([a[-1]], "<=", ci - a[:-1] @ t) for a, ci in zip(A, c)], 1))
        member = bool(out.contains(t, tol=1e-9))
        if res.optimal != member:
            # disagreement only allowed on the boundary
            viol = out.A @ t - out.c
            assert abs(viol.max()) < 1e-7


# ------------------------------------------------------ redundancy


def test_redundant_dominated_row():
    out = remove_redundant(InequalitySystem(np.array([[1.0], [1.0]]), np.array([1.0, 2.0])))
    assert out.n_rows == 1 and out.c[0] == 1.0


def test_redundant_duplicate_row():
    sys = InequalitySystem(np.array([[1.0], [-1.0], [1.0]]), np.array([1.0, 1.0, 1.0]))
    out = remove_redundant(sys)
    assert out.n_rows == 2
    assert sorted(out.A[:, 0]) == [-1.0, 1.0]


def test_redundant_symmetric_pairs_stay_paired():
    sys = InequalitySystem.from_pairs([[1.0], [2.0]], [1.0, 5.0])
    out = remove_redundant(sys)
    assert out.symmetric and out.n_rows == 2


def test_redundant_planted_rows_keep_membership():
    rng = np.random.default_rng(3)
    A = rng.normal(size=(6, 3))
    c = rng.uniform(0.5, 1.5, size=6)
    # planted redundancies: positive combinations of existing rows, loosened
    W = rng.uniform(0, 1, size=(5, 6))
    A_all = np.vstack([A, W @ A, np.eye(3), -np.eye(3)])
    c_all = np.concatenate([c, W @ c + 0.1, 3 * np.ones(6)])
    sys = InequalitySystem(A_all, c_all)
    out = remove_redundant(sys)
    assert out.n_rows < sys.n_rows
    pts = rng.uniform(-3.5, 3.5, size=(1000, 3))
    a, b = sys.contains(pts, tol=0.0), out.contains(pts, tol=0.0)
    # agreement away from the boundary
    slack = np.min(np.abs(pts @ A_all.T - c_all), axis=1)
    assert np.array_equal(a[slack > 1e-9], b[slack > 1e-9])
    # no remaining row is implied by the others
    for i in range(out.n_rows):
        others = np.delete(np.arange(out.n_rows), i)
        res = solve_dense([-out.A[i]], out.A[others], out.c[others])
        assert res.status == UNBOUNDED or -res.value > out.c[i] + 1e-9


# ------------------------------------------------------ envelope QP


def _qp_objective(c, A, e, x, xi):
    return x @ xi - xi @ xi / (4 * c) - np.max(A @ xi + e)


def _ternary_max(f, lo, hi, iters=200):
    for _ in range(iters):
        m1, m2 = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(m1) < f(m2):
            lo = m1
        else:
            hi = m2
    return (lo + hi) / 2


def test_qp_single_piece_closed_form():
    c, a, e, x = 2.0, np.array([1.0, -1.0]), 0.5, np.array([3.0, 1.0])
    xi, value, _ = solve_envelope_qp(c, a[None, :], [e], x)
    np.testing.assert_allclose(xi, 2 * c * (x - a), atol=1e-12)
    assert value == pytest.approx(c * (x - a) @ (x - a) - e)


def test_qp_symmetric_pair_at_kink():
    # h(w) = min((w+1)^2, (w-1)^2): conjugate pieces a = -+1, e = 0; conv h(0) = 0
    A = np.array([[1.0], [-1.0]])
    xi, value, lam = solve_envelope_qp(1.0, A, [0.0, 0.0], [0.0])
    assert xi[0] == pytest.approx(0.0, abs=1e-12)
    assert value == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(lam, [0.5, 0.5])


def test_qp_asymmetric_pair_matches_bisection():
    c, A, e, x = 1.5, np.array([[0.7], [-1.2]]), np.array([0.3, -0.1]), np.array([0.2])
    xi, value, _ = solve_envelope_qp(c, A, e, x)
    ref = _ternary_max(lambda s: _qp_objective(c, A, e, x, np.array([s])), -20, 20)
    assert xi[0] == pytest.approx(ref, abs=1e-8)
    assert value == pytest.approx(_qp_objective(c, A, e, x, np.array([ref])), abs=1e-10)
    # each piece's unconstrained maximiser lies on the other piece's side, so the
    # optimum is the kink 0.7 s + 0.3 = -1.2 s - 0.1, i.e. s = -4/19
    kink = -4.0 / 19.0
    assert xi[0] == pytest.approx(kink, abs=1e-10)
    assert value == pytest.approx(-0.5 * kink - kink**2 / 6 - 0.3, abs=1e-12)


def test_qp_rejects_bad_curvature():
    with pytest.raises(InputError):
        solve_envelope_qp(0.0, np.zeros((1, 1)), [0.0], [0.0])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_qp_value_matches_grid_and_dual(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    p = int(rng.integers(1, 6))
    c = float(rng.uniform(0.5, 2))
    A, e, x = rng.normal(size=(p, n)), rng.normal(size=p), rng.normal(size=n)
    xi, value, lam = solve_envelope_qp(c, A, e, x)
    # strong duality: primal value = dual minimum
    dual = c * np.sum((x - A.T @ lam) ** 2) - e @ lam
    assert value == pytest.approx(dual, abs=1e-7)
    # grid over the bounding box of the per-piece gradients 2c(x - a)
    corners = 2 * c * (x - A)
    lo, hi = corners.min(0) - 1, corners.max(0) + 1
    axes = [np.linspace(l, h, 201 if n == 1 else 61) for l, h in zip(lo, hi)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    vals = G @ x - (G**2).sum(1) / (4 * c) - np.max(G @ A.T + e, axis=1)
    step = max((h - l) for l, h in zip(lo, hi)) / 60
    assert vals.max() <= value + 1e-9
    assert vals.max() >= value - step * (np.abs(x).max() + np.abs(A).max() + np.abs(xi).max() / c + 1)
