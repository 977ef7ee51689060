"""Error taxonomy shared by the services, the CLI and the HTTP layer."""


class TetraError(Exception):
    """Base class for every error raised by the library"""


class ConfigError(TetraError, ValueError):
    """Unknown or malformed configuration value"""


class DomainError(TetraError, ValueError):
    """Argument lies outside the domain of the operation"""


class ParameterError(TetraError, ValueError):
    """Parameter violates its stated range"""


class PreconditionError(TetraError, ValueError):
    """A certified precondition (e.g. a root-free disc) does not hold"""


class DegenerateInputError(TetraError, ValueError):
    """Input is identically zero or otherwise degenerate"""


class ContourError(TetraError, ValueError):
    """Function comes too close to zero on a counting contour"""


class SingularityError(TetraError, ValueError):
    """A denominator falls below the singularity tolerance"""


class FeasibilityError(TetraError, ValueError):
    """Extremal disc lies outside the regime where the composite construction applies"""


class ConstructionError(TetraError, ValueError):
    """Numerical construction of a left inverse did not reach its residual target"""


class CertificationError(TetraError, ValueError):
    """A constructed object failed its certificate"""


class MultiStepError(TetraError, ValueError):
    """Lifting would need more than one factoring step"""


class ContradictionError(TetraError, ArithmeticError):
    """A proven identity or bound failed numerically"""
