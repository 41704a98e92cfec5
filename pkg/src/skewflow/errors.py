"""Exception types raised across the package."""


class SkewflowError(Exception):
    """Base class. ``step`` is filled in when a failure happens inside a run."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step

    def __str__(self) -> str:
        msg = super().__str__()
        if self.step is not None:
            return f"{msg} (at step {self.step})"
        return msg


class DomainError(SkewflowError, ValueError):
    """A primal point lies outside (or on the boundary of) its open domain."""


class UnsupportedError(SkewflowError):
    """The operation is not defined for this mirror-map kind or domain."""


class DimensionError(SkewflowError, ValueError):
    pass


class ConvergenceError(SkewflowError):
    """An iterative solver hit its iteration cap.

    ``residual`` holds the last residual norm.
    """

    def __init__(self, message: str, residual: float = float("nan"), step: int | None = None):
        super().__init__(message, step=step)
        self.residual = residual


class TrajectoryOverflowError(SkewflowError, OverflowError):
    """Dual iterates left the representable range (|z_i| > 1e150 or non-finite)."""


class SchemeMismatchError(SkewflowError, ValueError):
    pass


class MissingColumnError(SkewflowError, KeyError):
    pass


class ConfigError(SkewflowError, ValueError):
    pass
