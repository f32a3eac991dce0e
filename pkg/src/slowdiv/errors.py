"""Exception hierarchy.

Two broad failure classes matter downstream: bad inputs (rejected before any
numerics run) and numerical failures (a well-posed computation that did not
converge or is genuinely divergent).  The CLI maps the former to exit status 2
and the latter to exit status 3.
"""


class SlowdivError(Exception):
    """Base class for all package errors."""


class ValidationError(SlowdivError):
    """Input rejected: malformed model, point off the boundary, bad interval."""


class NotOnBoundaryError(ValidationError):
    """Point does not lie on the switching boundary within tolerance."""


class CrossingRegionError(ValidationError):
    """Operation requires a sliding point but the point is in the crossing set."""


class NormalFormError(ValidationError):
    """Operation requires the boundary to be the x-axis (h = y)."""


class NumericalError(SlowdivError):
    """A numerical procedure failed to converge or hit a degenerate case."""


class DivergentIntegralError(NumericalError):
    """Improper slow divergence integral diverges (boundary zero too deep)."""


class BracketError(NumericalError):
    """Root bracketing or refinement failed."""


class NoReturnError(NumericalError):
    """Trajectory left the domain or exhausted the time budget before returning."""
