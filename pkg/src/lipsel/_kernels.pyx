# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics are identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, INFINITY

cnp.import_array()


def simplex_pivot_loop(double[:, ::1] T, long[::1] basis, Py_ssize_t m,
                       Py_ssize_t obj_row, const unsigned char[::1] allowed,
                       double tol_rc, double tol_piv, Py_ssize_t max_iter):
    """Run Bland-rule primal simplex pivots on a dense tableau in place.

    Returns ``(status, iterations, column)``; status 0 optimal, 1 unbounded
    (``column`` is the unbounded entering column), 2 iteration limit.
    """
    cdef Py_ssize_t nrows = T.shape[0]
    cdef Py_ssize_t ncols = T.shape[1] - 1
    cdef Py_ssize_t it = 0, i, j, e, r
    cdef double best, ratio, piv, f, tie, cmax, thresh
    while it < max_iter:
        e = -1
        for j in range(ncols):
            if allowed[j] and T[obj_row, j] < -tol_rc:
                e = j
                break
        if e < 0:
            return 0, it, -1
        # pivots tiny next to the largest entry of the column are round-off; skip them
        cmax = 0.0
        for i in range(m):
            if fabs(T[i, e]) > cmax:
                cmax = fabs(T[i, e])
        thresh = tol_piv * (1.0 if cmax < 1.0 else cmax)
        r = -1
        best = INFINITY
        for i in range(m):
            if T[i, e] > thresh:
                # round-off can leave degenerate basics slightly negative;
                # exact zero ratios keep the smallest-index tie rule effective
                ratio = (T[i, ncols] if T[i, ncols] > 0.0 else 0.0) / T[i, e]
                if r < 0:
                    r = i
                    best = ratio
                else:
                    tie = 1e-12 * (1.0 + fabs(best))
                    if ratio < best - tie:
                        r = i
                        best = ratio
                    elif ratio <= best + tie and basis[i] < basis[r]:
                        r = i
                        best = ratio
        if r < 0:
            return 1, it, e
        piv = T[r, e]
        for j in range(ncols + 1):
            T[r, j] /= piv
        for i in range(nrows):
            if i != r:
                f = T[i, e]
                if f != 0.0:
                    for j in range(ncols + 1):
                        T[i, j] -= f * T[r, j]
                    T[i, e] = 0.0
        T[r, e] = 1.0
        basis[r] = e
        it += 1
    return 2, it, -1


def floyd_warshall(double[:, ::1] D):
    """All-pairs shortest paths in place; ``inf`` marks missing edges."""
    cdef Py_ssize_t n = D.shape[0], i, j, k
    cdef double dik, cand
    for k in range(n):
        for i in range(n):
            dik = D[i, k]
            if dik == INFINITY:
                continue
            for j in range(n):
                cand = dik + D[k, j]
                if cand < D[i, j]:
                    D[i, j] = cand
    return np.asarray(D)


def minplus(const double[::1] b, const double[:, ::1] rho):
    """``out[i] = min_j (b[j] + rho[i, j])`` with ``inf`` absorbing."""
    cdef Py_ssize_t n = rho.shape[0], k = rho.shape[1], i, j
    cdef double best, cand
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        best = INFINITY
        for j in range(k):
            cand = b[j] + rho[i, j]
            if cand < best:
                best = cand
        o[i] = best
    return out


cdef inline double _ratio(double diff, double d, double zero_tol):
    if d == INFINITY:
        return 0.0
    if d <= 0.0:
        return 0.0 if diff <= zero_tol else INFINITY
    return diff / d


def seminorm_dense(const double[:, ::1] P, const double[:, ::1] rho, double zero_tol):
    """Max of ``||P_i - P_j||_inf / rho[i, j]`` over pairs; returns (value, i, j)."""
    cdef Py_ssize_t n = P.shape[0], dim = P.shape[1], i, j, c
    cdef double best = 0.0, diff, q
    cdef Py_ssize_t bi = -1, bj = -1
    for i in range(n):
        for j in range(i + 1, n):
            diff = 0.0
            for c in range(dim):
                q = fabs(P[i, c] - P[j, c])
                if q > diff:
                    diff = q
            q = _ratio(diff, rho[i, j], zero_tol)
            if q > best:
                best = q
                bi = i
                bj = j
    return best, bi, bj


def seminorm_doubled(const double[:, ::1] P, const long[::1] group,
                     const double[::1] r, const double[:, ::1] rho_parent,
                     double zero_tol):
    """Seminorm w.r.t. ``rho_parent[g_a, g_b] + r_a + r_b`` (a != b)."""
    cdef Py_ssize_t n = P.shape[0], dim = P.shape[1], i, j, c
    cdef double best = 0.0, diff, q, d
    cdef Py_ssize_t bi = -1, bj = -1
    for i in range(n):
        for j in range(i + 1, n):
            diff = 0.0
            for c in range(dim):
                q = fabs(P[i, c] - P[j, c])
                if q > diff:
                    diff = q
            d = rho_parent[group[i], group[j]] + r[i] + r[j]
            q = _ratio(diff, d, zero_tol)
            if q > best:
                best = q
                bi = i
                bj = j
    return best, bi, bj
