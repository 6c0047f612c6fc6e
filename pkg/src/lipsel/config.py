"""Numerical tolerances, configurable per context.

All constructions are exact-arithmetic mathematics; floating point needs
explicit slack. Values are read through :func:`get_tolerances` so that a
caller (or the CLI ``--tol-*`` flags) can override them for one job without
touching global state of concurrent jobs.
"""

import contextlib
import contextvars
import dataclasses


@dataclasses.dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-9  # LP feasibility, 2-point hypotheses
    kkt: float = 1e-8  # QP stationarity/complementarity
    rank: float = 1e-10  # Gram-Schmidt / SVD rank decisions
    member: float = 1e-8  # point-in-flat and slab membership
    pivot: float = 1e-9  # smallest admissible simplex pivot


_current = contextvars.ContextVar("lipsel_tolerances", default=Tolerances())


def get_tolerances():
    return _current.get()


@contextlib.contextmanager
def use_tolerances(**overrides):
    """Temporarily override some tolerances, e.g. ``use_tolerances(feas=1e-7)``."""
    token = _current.set(dataclasses.replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
