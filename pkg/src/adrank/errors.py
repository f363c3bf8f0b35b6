"""Exception types shared across the package."""


class AdrankError(Exception):
    """Base class for all adrank errors."""


class ParseError(AdrankError):
    """A file could not be parsed; message carries line/position info."""


class FormatError(AdrankError):
    """A file is structurally invalid (empty, wrong layout, bad version)."""


class DimensionError(AdrankError):
    """Vector or matrix dimensions are inconsistent."""


class ConfigError(AdrankError):
    """Invalid configuration or empty required input."""


class DivergenceError(AdrankError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch
