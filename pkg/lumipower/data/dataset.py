import os
from contextlib import nullcontext
from dataclasses import dataclass
from functools import partial
from multiprocessing.pool import ThreadPool
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from lumipower.tensor import Tensor
from lumipower.utility.logging import get_script_logger

from .config import DataConfig
from .manifest import ModuleSample
from .transforms import augment, fit_normalization, normalize, preprocess, read_image


@dataclass
class Batch:
    x: Tensor  # (B, 1, H, W)
    y: Tensor  # (B, 1)
    indices: np.ndarray


class ModuleDataset:
    """
    Preprocessed module images with batch assembly.

    Every batch holds a single grid geometry. Shuffling draws from
    (seed, epoch) and augmentation of a sample from (seed, epoch, index), so
    batches do not depend on the number of loader threads.
    """

    def __init__(self, samples: Sequence[ModuleSample], config: Optional[DataConfig] = None, stride: int = 32):
        self.samples = list(samples)
        self.config = config or DataConfig()
        self.stride = stride
        self._cache = {}
        self.logger = get_script_logger(os.path.basename(__file__))

    def __len__(self):
        return len(self.samples)

    def target_shape(self, index: int) -> Tuple[int, int]:
        sample = self.samples[index]
        return self.config.target_shape(sample.rows, sample.cols, self.stride)

    def image(self, index: int) -> np.ndarray:
        """Cropped and resampled (not normalized) image, cached."""
        if index not in self._cache:
            raw = read_image(self.samples[index].image_path)
            self._cache[index] = preprocess(raw, self.target_shape(index)).data[0, 0].astype(np.float64)
        return self._cache[index]

    def fit_normalization(self, indices: Sequence[int]) -> Tuple[float, float]:
        return fit_normalization(self.image(i) for i in indices)

    def targets(self, indices: Sequence[int]) -> np.ndarray:
        return np.array([self.samples[i].y for i in indices], dtype=np.float64)

    def _load(self, index: int, stats, epoch: int, seed: int, augmented: bool) -> np.ndarray:
        image = self.image(index)
        if augmented:
            image = augment(image, np.random.default_rng([seed, epoch, index]))
        return normalize(image, stats)

    def group_by_geometry(self, indices: Sequence[int]) -> List[List[int]]:
        groups = {}
        for index in indices:
            groups.setdefault(self.target_shape(index), []).append(int(index))
        return list(groups.values())

    def batches(
        self,
        indices: Sequence[int],
        batch_size: int,
        stats: Tuple[float, float],
        epoch: int = 0,
        seed: int = 0,
        shuffle: bool = False,
        augmented: bool = False,
    ) -> Iterator[Batch]:
        batch_size = max(1, min(batch_size, len(indices)))
        rng = np.random.default_rng([seed, epoch])
        chunks = []
        for group in self.group_by_geometry(indices):
            if shuffle:
                group = list(rng.permutation(group))
            chunks.extend(group[i : i + batch_size] for i in range(0, len(group), batch_size))
        if shuffle:
            chunks = [chunks[i] for i in rng.permutation(len(chunks))]

        load = partial(self._load, stats=stats, epoch=epoch, seed=seed, augmented=augmented)
        workers = self.config.workers
        with ThreadPool(workers) if workers > 1 else nullcontext() as pool:
            mapper = pool.map if pool is not None else lambda f, xs: list(map(f, xs))
            for chunk in chunks:
                images = mapper(load, chunk)
                yield Batch(
                    x=Tensor(np.stack(images)[:, None]),
                    y=Tensor(self.targets(chunk)[:, None]),
                    indices=np.asarray(chunk),
                )
