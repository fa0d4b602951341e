"""Exception hierarchy shared by every module of the package."""


class NoonSimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NoonSimError, ValueError):
    """Invalid truncation, parameters, or config file contents."""


class TruncationError(ConfigurationError):
    """Fock truncation too small to hold the protocol plus guard levels."""


class DomainError(NoonSimError, ValueError):
    """Protocol targets outside their allowed range (e.g. N < 1)."""


class BoundsError(NoonSimError, IndexError):
    """Basis label or rung outside the truncated space."""


class ShapeError(NoonSimError, ValueError):
    """Operator dimension does not match the target slot or space."""


class UnsupportedTransitionError(NoonSimError, ValueError):
    """Qutrit transition other than g<->e or e<->a."""


class UnsupportedFrameError(NoonSimError, ValueError):
    """Rotating-frame generator that is not diagonal."""


class IntegrityError(NoonSimError, RuntimeError):
    """An operator that must be Hermitian or unitary is not."""


class NumericalFailure(NoonSimError, RuntimeError):
    """Norm drift or other numerical breakdown during propagation."""

    def __init__(self, message, segment_index=None):
        if segment_index is not None:
            message = f"segment {segment_index}: {message}"
        super().__init__(message)
        self.segment_index = segment_index


class StepSizeError(NumericalFailure):
    """Fixed-step integrator went unstable for the requested step."""
