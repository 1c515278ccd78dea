"""Exception hierarchy shared by the numerical modules."""


class BoundsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BoundsError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(BoundsError, ValueError):
    """Solver settings cannot deliver the requested accuracy."""


class ConvergenceError(BoundsError, RuntimeError):
    """An iterative procedure did not converge."""


class BracketError(ConvergenceError):
    """No interior extremum could be bracketed.

    Raised for objectives that are monotone over the searched range, e.g.
    the variational upper bound for an overcritical Coulomb-like coupling.
    """


class NonFiniteError(BoundsError, FloatingPointError):
    """An objective evaluated to nan or inf."""


class ConvexityError(DomainError):
    """A transformation g failed the sampled convexity audit."""
