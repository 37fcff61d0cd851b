"""Exception hierarchy.

Every domain failure raised by the package derives from :class:`EmulatorError`;
the CLI maps these to exit status 1.
"""


class EmulatorError(Exception):
    """Base class for domain errors."""


class InvalidArgument(EmulatorError, ValueError):
    pass


class InvalidRegister(EmulatorError, ValueError):
    pass


class CapacityError(EmulatorError):
    """Requested problem exceeds the desk-scale size cap."""


class InvalidOperator(EmulatorError, ValueError):
    """Matrix is not unitary/Hermitian as required."""


class RydbergLeakageError(EmulatorError):
    pass


class DomainError(EmulatorError, ValueError):
    """Time outside the waveform domain."""


class IntegrationError(EmulatorError):
    pass


class InsufficientAtoms(EmulatorError):
    pass


class InvalidPlan(EmulatorError, ValueError):
    pass


class AssemblyFailed(EmulatorError):
    """Retries exhausted before the target was filled.

    The last occupancy image is kept on ``occupancy``.
    """

    def __init__(self, message, occupancy=None, attempts=0, moves_used=0):
        super().__init__(message)
        self.occupancy = occupancy
        self.attempts = attempts
        self.moves_used = moves_used


class InvalidGraph(EmulatorError, ValueError):
    pass


class ConfigError(EmulatorError, ValueError):
    """Schema violation in an input file; ``field`` names the offender."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
