"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``."""

import numpy as np

_CHUNK = 512


def simplex_pivot_loop(T, basis, m, obj_row, allowed, tol_rc, tol_piv, max_iter):
    ncols = T.shape[1] - 1
    allowed = np.asarray(allowed, dtype=bool)
    it = 0
    while it < max_iter:
        cand = np.flatnonzero(allowed & (T[obj_row, :ncols] < -tol_rc))
        if cand.size == 0:
            return 0, it, -1
        e = int(cand[0])
        col = T[:m, e]
        # pivots tiny next to the largest entry of the column are round-off; skip them
        thresh = tol_piv * max(1.0, float(np.abs(col).max(initial=0.0)))
        rows = np.flatnonzero(col > thresh)
        if rows.size == 0:
            return 1, it, e
        r = -1
        best = np.inf
        for i in rows:
            # round-off can leave degenerate basics slightly negative;
            # exact zero ratios keep the smallest-index tie rule effective
            ratio = max(T[i, ncols], 0.0) / T[i, e]
            if r < 0:
                r, best = i, ratio
                continue
            tie = 1e-12 * (1.0 + abs(best))
            if ratio < best - tie or (ratio <= best + tie and basis[i] < basis[r]):
                r, best = i, ratio
        T[r] /= T[r, e]
        f = T[:, e].copy()
        f[r] = 0.0
        T -= np.outer(f, T[r])
        T[:, e] = 0.0
        T[r, e] = 1.0
        basis[r] = e
        it += 1
    return 2, it, -1


def floyd_warshall(D):
    for k in range(D.shape[0]):
        np.minimum(D, D[:, k : k + 1] + D[k : k + 1, :], out=D)
    return D


def minplus(b, rho):
    out = np.empty(rho.shape[0])
    for s in range(0, rho.shape[0], _CHUNK):
        out[s : s + _CHUNK] = (b[None, :] + rho[s : s + _CHUNK]).min(axis=1, initial=np.inf)
    return out


def _ratios(diff, d, zero_tol):
    with np.errstate(divide="ignore", invalid="ignore"):
        q = diff / d
    q[np.isinf(d)] = 0.0
    zero = d <= 0.0
    q[zero] = np.where(diff[zero] <= zero_tol, 0.0, np.inf)
    return q


def _scan(P, dist_rows, zero_tol):
    n = P.shape[0]
    step = max(1, 4_000_000 // max(1, n * P.shape[1]))
    best, bi, bj = 0.0, -1, -1
    for s in range(0, n, step):
        blk = np.abs(P[s : s + step, None, :] - P[None, :, :]).max(axis=2, initial=0.0)
        q = _ratios(blk, dist_rows(s, s + blk.shape[0]), zero_tol)
        rows = np.arange(s, s + blk.shape[0])
        q[np.arange(n)[None, :] <= rows[:, None]] = 0.0
        idx = int(np.argmax(q))
        v = q.flat[idx]
        if v > best:
            best, bi, bj = float(v), s + idx // n, idx % n
    return best, bi, bj


def seminorm_dense(P, rho, zero_tol):
    return _scan(P, lambda a, b: rho[a:b], zero_tol)


def seminorm_doubled(P, group, r, rho_parent, zero_tol):
    def rows(a, b):
        return rho_parent[group[a:b]][:, group] + r[a:b, None] + r[None, :]

    return _scan(P, rows, zero_tol)
