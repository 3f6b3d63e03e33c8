"""Exception hierarchy shared by all modules.

Every exception carries the process exit code the command-line front end
maps it to: 1 for numerical failures, 2 for mathematically meaningful
boundary cases, 3 for bad input.
"""


class StabpathError(Exception):
    """Base class; numerical or internal failure."""

    exit_code = 1


class NumericalError(StabpathError):
    """A computation could not reach its accuracy target."""


class IntegrationError(NumericalError):
    """The ODE integrator stopped early.

    Attributes
    ----------
    t_last : float
        Last time the integrator reached successfully.
    """

    def __init__(self, message, t_last):
        super().__init__(f"{message} (last good t = {t_last!r})")
        self.t_last = t_last


class BranchTrackingError(NumericalError):
    """Consecutive samples are too far apart to follow a logarithm."""


class DomainError(StabpathError, ValueError):
    """Argument outside the domain of the function."""

    exit_code = 3


class InputError(StabpathError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class GenericityError(StabpathError):
    """Growth exponents violate the genericity condition.

    Two clusters share an imaginary part but differ in real part.
    """

    exit_code = 2


class BoundaryCaseError(GenericityError):
    """Non-generic parameters with no decomposition to extract."""


class SingularPathError(DomainError):
    """A parametrised path passes through a pole on the sample grid."""
