"""Lipschitz selections of affine-set-valued maps on finite graphs.

Also provides the applications built on them: gradient fields for sampled
functions (Whitney jets), explicit C^{1,1} and Kirszbraun extensions via
convex envelopes, and Hoelder solutions of pointwise linear systems.
"""

__version__ = "0.1.0"

from .errors import (
    HypothesisError,
    InfeasibleSystemError,
    InputError,
    InternalError,
    LipselError,
    NoSelectionAtEdge,
)
from .geometry import AffineSubspace, Cube
from .kernels import BACKEND
from .metricspace import Modulus, PseudometricSpace, WeightedGraph, full_graph, path_metric
from .selection import AffineMap, CubeMap, Selection, select_affine, select_cube, validate_selection
