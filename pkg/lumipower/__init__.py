from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    LumipowerError,
    NumericError,
    ShapeError,
)
from .utility import *

__version__ = "0.1.0"
