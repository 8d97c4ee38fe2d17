"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter combination."""


class DimensionError(ValueError):
    """Array shapes do not match the grid / sensor layout they claim to live on."""


class SingularityError(ValueError):
    """Green's function evaluated at zero separation."""


class NumericalError(ArithmeticError):
    """Base class for runtime numerical failures."""


class StepDegeneracyError(NumericalError):
    """Adaptive step size is 0/0-degenerate while the gradient is nonzero."""


class ResonanceError(NumericalError):
    """Radial-coefficient determinant is numerically singular for some order."""


class TransformError(ValueError):
    """Data transform (e.g. complex-log) undefined for the given inputs."""


class MeasurementParseError(ValueError):
    """Malformed measurement file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceWarning(UserWarning):
    """A truncated series or iterative solve did not reach its internal tolerance."""
