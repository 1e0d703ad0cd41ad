from src.conf import messages


class PcfError(Exception):
    """Base class for every error raised by the estimation library."""


class InvalidInputError(PcfError):
    """Malformed input: bad window, pattern, intensity or configuration."""


class WindowError(InvalidInputError):
    pass


class MissingIntensityError(InvalidInputError):
    pass


class PatternFormatError(InvalidInputError):
    pass


class ConfigError(InvalidInputError):
    pass


class NumericalError(PcfError):
    """A numerically infeasible request (singular system, no data, divergence)."""


class SingularSystemError(NumericalError):
    """
    The variational matrix cannot be inverted reliably.

    Attributes:
        condition (float): Estimated 2-norm condition number (inf when A is rank deficient).
    """

    def __init__(self, condition: float):
        self.condition = condition
        super().__init__(messages.SINGULAR_SYSTEM.format(condition=condition))


class InsufficientPairsError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class NoFeasibleKError(NumericalError):
    pass
