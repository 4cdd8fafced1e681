"""Exception hierarchy shared by all subpackages."""


class EssError(Exception):
    """Base class for every error raised by :mod:`ess`."""


class DomainError(EssError, ValueError):
    """A point or parameter lies outside the region where an operation is defined."""


class ParameterError(EssError, ValueError):
    """Invalid combination of numerical parameters."""


class SolverError(EssError, RuntimeError):
    """An iterative or direct solver failed to meet its tolerance."""


class ProjectionError(SolverError):
    """Newton projection onto the boundary graph did not converge."""


class SingularityError(EssError, ValueError):
    """Evaluation at a coincident pair of points."""


class UnsupportedDomainError(EssError, TypeError):
    """The operation exists only for particular domain kinds."""


class CFLError(SolverError):
    """Time step could not be reduced enough to satisfy the CFL cap."""


class OrderingError(EssError, RuntimeError):
    """Marker ordering a <= b (or monotone decay) was violated."""


class ScaleExhausted(EssError):
    """The tracked scale dropped below the resolvable floor.

    This is the expected end of a growth run, not a failure.
    """


class ConfigError(EssError, ValueError):
    """Experiment configuration is malformed or inconsistent."""


class SchemaError(EssError, ValueError):
    """An input table lacks a required column or is empty."""
