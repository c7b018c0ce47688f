"""Exception types raised by popgraph."""


class PopgraphError(Exception):
    """Base class for all package errors."""


class GenerationStalled(PopgraphError):
    """Every group is saturated before the edge budget is placed."""


class ParseError(PopgraphError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConsistencyError(PopgraphError):
    """Header counts disagree with the body of an edge-list file."""


class ParamMismatch(PopgraphError):
    """Graphs pooled together were generated with different parameters."""


class InsufficientSupport(PopgraphError):
    pass


class EmptySupport(PopgraphError):
    pass


class DegenerateMarginal(PopgraphError):
    """A query response marginal is 0 or 1, so the likelihood ratio is undefined."""
