__doc__ = """
Exception hierarchy. The CLI maps these onto exit codes.
"""


class LumipowerError(Exception):
    """Base class for every error raised by the package."""


class ShapeError(LumipowerError, ValueError):
    """Operand shapes do not fit the operation."""


class DataError(LumipowerError, ValueError):
    """Input data violates a dataset or file-format contract."""


class ConfigError(LumipowerError, ValueError):
    """Run configuration is malformed or contains unknown keys."""


class CheckpointError(DataError):
    """Checkpoint file is corrupt, truncated, of another version, or incompatible."""


class NumericError(LumipowerError, ArithmeticError):
    """Non-finite values appeared during optimization."""
