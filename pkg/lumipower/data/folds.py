from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from lumipower.errors import DataError


@dataclass
class FoldSplit:
    """
    Attributes
    ----------
    fold_assignments : np.ndarray
        fold id of every sample (manifest order).
    n_folds : int
    normalization_stats : Dict[int, Tuple[float, float]]
        (mu, sigma) fitted on each fold's training portion, filled by the harness.
    """

    fold_assignments: np.ndarray
    n_folds: int = 3
    normalization_stats: Dict[int, Tuple[float, float]] = field(default_factory=dict)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignments != fold)

    def sizes(self):
        return np.bincount(self.fold_assignments, minlength=self.n_folds)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"sample_index": np.arange(len(self.fold_assignments)), "fold": self.fold_assignments}
        )

    def to_csv(self, path: str | Path):
        self.to_frame().to_csv(path, index=False, lineterminator="\n")


def _targets(samples) -> np.ndarray:
    return np.array([s.y if hasattr(s, "y") else s for s in samples], dtype=np.float64)


def stratified_k_fold(samples: Sequence, k: int = 3, seed: Optional[int] = 0) -> FoldSplit:
    """
    Sort by y (stable, so ties keep manifest order) and deal each consecutive
    block of k samples to the k folds. The seed permutes fold labels inside
    each block; `seed=None` deals plain round-robin (rank i to fold i mod k).
    """
    ys = _targets(samples)
    if k < 2:
        raise DataError(f"Need at least 2 folds, got {k}")
    if len(ys) < k:
        raise DataError(f"Need at least {k} samples for {k} folds, got {len(ys)}")
    order = np.argsort(ys, kind="stable")
    if seed is None:
        assignments = np.empty(len(ys), dtype=np.int64)
        assignments[order] = np.arange(len(ys)) % k
        return FoldSplit(fold_assignments=assignments, n_folds=k)
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(ys), dtype=np.int64)
    for start in range(0, len(ys), k):
        block = order[start : start + k]
        assignments[block] = rng.permutation(k)[: len(block)]
    return FoldSplit(fold_assignments=assignments, n_folds=k)


def stratified_three_fold(samples: Sequence, seed: Optional[int] = 0) -> FoldSplit:
    return stratified_k_fold(samples, 3, seed)
