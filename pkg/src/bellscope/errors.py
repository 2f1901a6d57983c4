"""Exception types shared across the package."""


class BellscopeError(Exception):
    pass


class NormalizationError(BellscopeError, ValueError):
    pass


class SignallingError(BellscopeError, ValueError):
    pass


class ResourceError(BellscopeError, RuntimeError):
    """A configured element-count or wall-clock cap was exceeded."""

    def __init__(self, message, *, limit=None, observed=None):
        super().__init__(message)
        self.limit = limit
        self.observed = observed


class InvalidInequality(BellscopeError, ValueError):
    """Some local deterministic point violates the inequality."""

    def __init__(self, message, *, vertex_index=None, value=None):
        super().__init__(message)
        self.vertex_index = vertex_index
        self.value = value


class IncompatibleScenario(BellscopeError, ValueError):
    pass


class UnsupportedScenario(BellscopeError, ValueError):
    pass


class ParameterOutOfRange(BellscopeError, ValueError):
    pass


class InvalidPartition(BellscopeError, ValueError):
    pass


class ShapeMismatch(BellscopeError, ValueError):
    pass


class ParseError(BellscopeError, ValueError):
    pass


class NotLocal(BellscopeError):
    """Raised by the Fine construction when a precondition facet is violated."""

    def __init__(self, message, *, facet=None, value=None):
        super().__init__(message)
        self.facet = facet
        self.value = value


class NonConvergence(BellscopeError, RuntimeError):
    """The see-saw hit its iteration cap; ``result`` holds the best point found."""

    def __init__(self, message, *, result=None):
        super().__init__(message)
        self.result = result
