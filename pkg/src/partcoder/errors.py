"""Exception types shared across the package."""


class PartcoderError(Exception):
    """Base class for all package errors."""


class ShapeError(PartcoderError, ValueError):
    """Array dimensions do not match what an operation requires."""


class DataError(PartcoderError, ValueError):
    """A data file or in-memory dataset violates its format contract."""


class ConfigError(PartcoderError, ValueError):
    """An experiment or training configuration is invalid."""


class OptimizationError(PartcoderError, RuntimeError):
    """The optimizer cannot continue (non-finite objective, divergence)."""
