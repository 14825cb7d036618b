"""Error taxonomy shared by all modules."""


class LindbladError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LindbladError):
    pass


class NotHermitian(LindbladError):
    pass


class NonPositiveRate(LindbladError):
    pass


class ValidationError(LindbladError):
    """An input failed density-matrix or model validation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NonConvergence(LindbladError):
    pass


class StepUnderflow(LindbladError):
    pass


class DegenerateSpectrum(LindbladError):
    pass


class RootNotBracketed(LindbladError):
    pass


class AllWeightsZero(LindbladError):
    pass


class ZeroTrace(LindbladError):
    pass


class InfiniteStateSpace(LindbladError):
    """State enumeration exceeded its budget; the finite-chain method does not apply."""

    def __init__(self, message, n_states=None):
        super().__init__(message)
        self.n_states = n_states


class TauDependentJump(LindbladError):
    """A normalized jump target depends on the waiting time; the chain method does not apply."""

    def __init__(self, message, state_index=None, channel=None):
        super().__init__(message)
        self.state_index = state_index
        self.channel = channel


class ColumnSumViolation(LindbladError):
    pass


class SingularRestriction(LindbladError):
    pass


class SingularTransientBlock(LindbladError):
    pass


class ZeroDenominator(LindbladError):
    pass


class ZeroSurvivingTrace(LindbladError):
    pass


class TrappingState(LindbladError):
    pass


class NotClassical(LindbladError):
    pass


class ModelFormatError(LindbladError):
    """A model file failed to parse; the message carries the offending field path."""


class SpectralFallbackWarning(UserWarning):
    """Emitted when a quantity is estimated by quadrature because H_c is not diagonalizable."""
