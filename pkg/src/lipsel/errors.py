"""Exception hierarchy.

``InputError`` means the caller handed us something malformed (CLI exit 1).
``HypothesisError`` means the data is well formed but the mathematical
hypothesis of a construction fails, e.g. no 2-point selection exists on some
edge (CLI exit 2). ``InternalError`` signals a broken post-condition.
"""


class LipselError(Exception):
    pass


class InputError(LipselError, ValueError):
    pass


class HypothesisError(LipselError):
    """A finiteness/2-point hypothesis fails.

    ``subset`` names the offending vertices, points or pair indices.
    """

    def __init__(self, message, subset=None, stage=None):
        super().__init__(message)
        self.subset = tuple(subset) if subset is not None else None
        self.stage = stage

    def to_dict(self):
        out = {"error": type(self).__name__, "message": str(self)}
        if self.subset is not None:
            out["subset"] = list(self.subset)
        if self.stage is not None:
            out["stage"] = self.stage
        return out


class NoSelectionAtEdge(HypothesisError):
    pass


class InfeasibleSystemError(HypothesisError):
    pass


class InternalError(LipselError, RuntimeError):
    pass
