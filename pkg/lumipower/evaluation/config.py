from dataclasses import dataclass
from typing import Tuple

from lumipower.errors import ConfigError
from lumipower.model.spec import HEAD_KINDS
from lumipower.utility.io_utils import DataclassYamlSaveLoadMixin


@dataclass
class CrossValidationConfig(DataclassYamlSaveLoadMixin):
    """
    Attributes
    ----------
    k : int
        Number of folds.
    seed : int
        Seed of the fold assignment.
    variants : Tuple[str, ...]
        Head kinds trained on every fold. The mean-predictor baseline always runs.
    embedding_learning_rate : float
        Learning rate of the embedding_linear variant.
    map_learning_rate : float
        Learning rate of the regression_map variant.
    processes : int
        Folds trained concurrently. 1 serializes folds.
    """

    k: int = 3
    seed: int = 0
    variants: Tuple[str, ...] = HEAD_KINDS
    embedding_learning_rate: float = 1e-2
    map_learning_rate: float = 1e-2
    processes: int = 1

    def __post_init__(self):
        self.variants = tuple(str(v) for v in self.variants)
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if not self.variants:
            raise ConfigError("At least one variant is required")
        unknown = [v for v in self.variants if v not in HEAD_KINDS]
        if unknown:
            raise ConfigError(f"Unknown variants {unknown}; choose from {HEAD_KINDS}")
        if len(set(self.variants)) != len(self.variants):
            raise ConfigError(f"Duplicate variants in {self.variants}")
        if not (self.embedding_learning_rate > 0 and self.map_learning_rate > 0):
            raise ConfigError("Learning rates must be positive")
        if self.processes < 1:
            raise ConfigError(f"processes must be >= 1, got {self.processes}")

    def learning_rate(self, head_kind: str) -> float:
        if head_kind == "embedding_linear":
            return self.embedding_learning_rate
        return self.map_learning_rate
