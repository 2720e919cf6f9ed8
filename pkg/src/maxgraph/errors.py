"""Exception hierarchy shared by all maxgraph modules."""


class MaxgraphError(Exception):
    """Base class for every error raised by maxgraph."""


class ExprError(MaxgraphError):
    pass


class ParseError(ExprError):
    """Syntax error in expression text; ``offset`` is a byte offset into the source."""

    def __init__(self, message, offset, source=""):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ParseError):
    def __init__(self, name, offset, source=""):
        self.name = name
        MaxgraphError.__init__(self, f"unknown identifier {name!r} at offset {offset}")
        self.offset = offset
        self.source = source


class ExprDomainError(ExprError, ArithmeticError):
    """Evaluation left the mathematical domain (log/sqrt of negative, division by zero)."""

    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in subexpression {subexpr}"
        super().__init__(message)


class OutOfDomainError(MaxgraphError, ValueError):
    """A point lies outside the domain of a metric (including the stencil margin)."""


class NonSpacelikeError(MaxgraphError, ValueError):
    """|Du|^2 >= 1 (or within the lightlike guard) where a spacelike graph is required."""


class NotPositiveDefiniteError(MaxgraphError, ValueError):
    pass


class QuadratureError(MaxgraphError):
    pass


class SolverError(MaxgraphError):
    pass


class SceneError(MaxgraphError, ValueError):
    """Invalid scene file: unresolved names, bad expressions, malformed entries."""
