"""Backend selection for the hot kernels.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy implementation in ``_kernels_py`` is. Setting ``LIPSEL_PURE_PYTHON=1``
forces the fallback. ``BACKEND`` names the active one.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("LIPSEL_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def simplex_pivot_loop(T, basis, m, obj_row, allowed, tol_rc, tol_piv, max_iter=50_000):
    return _impl.simplex_pivot_loop(
        T, basis, int(m), int(obj_row), np.ascontiguousarray(allowed, dtype=np.uint8),
        float(tol_rc), float(tol_piv), int(max_iter),
    )


def floyd_warshall(D):
    return _impl.floyd_warshall(_f64(D).copy())


def minplus(b, rho):
    return _impl.minplus(_f64(b), _f64(rho))


def seminorm_dense(P, rho, zero_tol):
    P = _f64(P).reshape(len(P), -1)
    return _impl.seminorm_dense(P, _f64(rho), float(zero_tol))


def seminorm_doubled(P, group, r, rho_parent, zero_tol):
    P = _f64(P).reshape(len(P), -1)
    group = np.ascontiguousarray(group, dtype=np.int64)
    return _impl.seminorm_doubled(P, group, _f64(r), _f64(rho_parent), float(zero_tol))
