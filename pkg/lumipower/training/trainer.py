import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from lumipower.data import ModuleDataset
from lumipower.errors import DataError, NumericError
from lumipower.model import ModelSpec, PowerRegressionNet, RegressionMap
from lumipower.persistence.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from lumipower.tensor import no_grad
from lumipower.utility.io import atomic_write_text
from lumipower.utility.logging import get_script_logger

from .config import TrainConfig
from .loss import mse_loss
from .optimizer import SGD

REPORT_COLUMNS = ["epoch", "train_loss", "val_mae"]


@dataclass
class TrainReport:
    """
    Attributes
    ----------
    train_loss : List[float]
        Mean batch loss per epoch.
    val_mae : List[float]
        Validation MAE (relative power) per epoch; NaN without a validation set.
    wall_clock_s : float
    config : TrainConfig
    checkpoint : Path | None
    """

    train_loss: List[float] = field(default_factory=list)
    val_mae: List[float] = field(default_factory=list)
    wall_clock_s: float = 0.0
    config: Optional[TrainConfig] = None
    checkpoint: Optional[Path] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epoch": np.arange(1, len(self.train_loss) + 1),
                "train_loss": self.train_loss,
                "val_mae": self.val_mae,
            },
            columns=REPORT_COLUMNS,
        )

    def to_csv(self, path: str | Path):
        atomic_write_text(path, self.to_frame().to_csv(index=False, float_format="%.17g", lineterminator="\n"))


def predict(
    model: PowerRegressionNet,
    dataset: ModuleDataset,
    indices: Sequence[int],
    stats: Tuple[float, float],
    batch_size: int = 8,
) -> Tuple[np.ndarray, Dict[int, RegressionMap]]:
    """
    Eval-mode predictions for `indices` (in that order) and, for map models,
    the regression map of every sample.
    """
    model.eval()
    position = {int(index): i for i, index in enumerate(indices)}
    y_hat = np.empty(len(indices), dtype=np.float64)
    maps = {}
    with no_grad():
        for batch in dataset.batches(indices, batch_size, stats):
            out = model(batch.x)
            y_hat[[position[int(i)] for i in batch.indices]] = out.y_hat.data[:, 0]
            for index, regression_map in zip(batch.indices, out.regression_maps()):
                maps[int(index)] = regression_map
    return y_hat, maps


class Trainer:
    """
    Mini-batch SGD on the mean squared error of the relative power.

    Parameters
    ----------
    model : PowerRegressionNet
    config : TrainConfig
    dataset : ModuleDataset
    stats : Tuple[float, float]
        Normalization (mu, sigma) applied to every image.
    """

    def __init__(self, model: PowerRegressionNet, config: TrainConfig, dataset: ModuleDataset, stats):
        self.model = model
        self.config = config
        self.dataset = dataset
        self.stats = stats
        self.optimizer = SGD(
            model.named_parameters(),
            config.learning_rate,
            config.momentum,
            config.weight_decay,
            decay_mask=model.decay_mask(),
        )
        self.logger = get_script_logger(os.path.basename(__file__))

    def train_step(self, batch) -> float:
        self.model.train()
        self.optimizer.zero_grad()
        loss = mse_loss(self.model(batch.x).y_hat, batch.y)
        value = loss.item()
        if not np.isfinite(value):
            return value
        loss.backward()
        self.optimizer.step()
        return value

    def fit(self, train_indices: Sequence[int], val_indices: Optional[Sequence[int]] = None) -> TrainReport:
        if len(train_indices) == 0:
            raise DataError("Training split is empty")
        config = self.config
        report = TrainReport(config=config)
        start = time.perf_counter()
        for epoch in tqdm(range(config.epochs), desc="train", leave=False):
            losses = []
            batches = self.dataset.batches(
                train_indices,
                config.batch_size,
                self.stats,
                epoch=epoch,
                seed=config.seed,
                shuffle=True,
                augmented=config.augment,
            )
            for index, batch in enumerate(batches):
                value = self.train_step(batch)
                if not np.isfinite(value):
                    raise NumericError(f"Non-finite loss {value} at epoch {epoch + 1}, batch {index + 1}")
                losses.append(value)
            report.train_loss.append(float(np.mean(losses)))
            if val_indices is not None and len(val_indices) > 0:
                y_hat, _ = predict(self.model, self.dataset, val_indices, self.stats, config.batch_size)
                report.val_mae.append(float(np.mean(np.abs(y_hat - self.dataset.targets(val_indices)))))
            else:
                report.val_mae.append(float("nan"))
            self.logger.debug(
                f"epoch {epoch + 1}/{config.epochs}: loss {report.train_loss[-1]:.6g}, "
                f"val MAE {report.val_mae[-1]:.6g}"
            )
        report.wall_clock_s = time.perf_counter() - start
        return report


@dataclass
class TrainResult:
    model: PowerRegressionNet
    report: TrainReport
    stats: Tuple[float, float]
    checkpoint: Checkpoint


def initial_model(spec: ModelSpec, config: TrainConfig) -> PowerRegressionNet:
    """Random initialization, or the weights of `config.init` (which must fit `spec`)."""
    model = PowerRegressionNet(spec, seed=config.seed)
    if config.init_from_checkpoint:
        model.load_state_dict(load_checkpoint(config.init).tensors)
    return model


def train(
    dataset: ModuleDataset,
    train_indices: Sequence[int],
    spec: ModelSpec,
    config: TrainConfig,
    val_indices: Optional[Sequence[int]] = None,
    stats: Optional[Tuple[float, float]] = None,
    checkpoint_path: Optional[str | Path] = None,
    config_echo: Optional[dict] = None,
) -> TrainResult:
    """
    Train one model on `train_indices` of `dataset`.

    Normalization is fitted on the training portion unless `stats` is given.
    The checkpoint echoes the training configuration and the normalization.
    """
    if len(train_indices) == 0:
        raise DataError("Training split is empty")
    stats = stats if stats is not None else dataset.fit_normalization(train_indices)
    model = initial_model(spec, config)
    trainer = Trainer(model, config, dataset, stats)
    report = trainer.fit(train_indices, val_indices)

    echo = {"train": config.to_dict(), "normalization": [float(stats[0]), float(stats[1])]}
    echo.update(config_echo or {})
    checkpoint = Checkpoint.from_model(model, trainer.optimizer, echo)
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, checkpoint)
        report.checkpoint = Path(checkpoint_path)
    return TrainResult(model=model, report=report, stats=stats, checkpoint=checkpoint)
