from dataclasses import dataclass

from lumipower.errors import ConfigError
from lumipower.utility.io_utils import DataclassYamlSaveLoadMixin


@dataclass
class DataConfig(DataclassYamlSaveLoadMixin):
    """
    Attributes
    ----------
    map_px_per_cell : int
        Regression-map pixels along each side of one cell. Modules are resampled
        to (rows * stride * k) x (cols * stride * k).
    stats_over_all : bool
        Fit normalization over the whole dataset instead of each training portion.
    workers : int
        Threads assembling batches. Batches do not depend on this value.
    """

    map_px_per_cell: int = 1
    stats_over_all: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.map_px_per_cell < 1:
            raise ConfigError(f"map_px_per_cell must be >= 1, got {self.map_px_per_cell}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def target_shape(self, rows: int, cols: int, stride: int = 32):
        """(H, W) input resolution of a module with the given cell grid."""
        side = stride * self.map_px_per_cell
        return rows * side, cols * side
