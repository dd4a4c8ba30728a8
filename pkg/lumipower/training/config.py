from dataclasses import dataclass

from lumipower.errors import ConfigError
from lumipower.utility.io_utils import DataclassYamlSaveLoadMixin


@dataclass
class TrainConfig(DataclassYamlSaveLoadMixin):
    """
    Optimization settings.

    Attributes
    ----------
    learning_rate : float
    momentum : float
    weight_decay : float
        Decoupled decay, applied to conv/linear weights only.
    batch_size : int
        Clipped to the training-set size.
    epochs : int
    seed : int
        Seeds initialization, shuffling and augmentation.
    init : str
        "random", or the path of a checkpoint whose weights initialize the model.
    augment : bool
        Random flips and rotations on training batches.
    """

    learning_rate: float = 1e-3
    momentum: float = 0.9
    weight_decay: float = 0.1
    batch_size: int = 8
    epochs: int = 100
    seed: int = 0
    init: str = "random"
    augment: bool = True

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not self.init:
            raise ConfigError("init must be 'random' or a checkpoint path")

    @property
    def init_from_checkpoint(self) -> bool:
        return self.init != "random"
