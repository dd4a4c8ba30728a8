from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.metrics import mean_absolute_error, mean_squared_error

from lumipower.errors import DataError

SAMPLE_COLUMNS = ["sample_index", "module_type", "fold", "y", "y_hat", "p_nom_wp"]
SUMMARY_COLUMNS = ["variant", "mae_pct", "mae_std_pct", "mae_wp", "mae_std_wp", "rmse_pct", "rmse_wp"]


def _pairs(y_hat, y):
    y_hat = np.asarray(y_hat, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size == 0:
        raise DataError("Metrics need at least one sample")
    if y_hat.shape != y.shape:
        raise DataError(f"{y_hat.size} predictions for {y.size} targets")
    return y_hat, y


def mae(y_hat: Sequence[float], y: Sequence[float]) -> float:
    """Mean absolute error in units of y (fractions of nominal power)."""
    y_hat, y = _pairs(y_hat, y)
    return float(mean_absolute_error(y, y_hat))


def rmse(y_hat: Sequence[float], y: Sequence[float]) -> float:
    y_hat, y = _pairs(y_hat, y)
    return float(np.sqrt(mean_squared_error(y, y_hat)))


def absolute_power(y_hat, p_nom_wp):
    """P_mpp = y * P_nom."""
    return np.multiply(y_hat, p_nom_wp)


def _fold_std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else float("nan")


@dataclass
class EvalSummary:
    """
    Metrics of one variant over the joined held-out predictions.

    Percent metrics are relative to nominal power; Wp metrics use the nominal
    power of every sample. Standard deviations of the MAE are taken across
    folds (ddof = 1); `sample_std_pct` is the spread of per-sample errors.

    Attributes
    ----------
    variant : str
    samples : pd.DataFrame
        One row per prediction with columns `SAMPLE_COLUMNS`.
    """

    variant: str
    samples: pd.DataFrame

    def __post_init__(self):
        if len(self.samples) == 0:
            raise DataError(f"No predictions for {self.variant}")
        missing = set(SAMPLE_COLUMNS) - set(self.samples.columns)
        if missing:
            raise DataError(f"Prediction table lacks columns {sorted(missing)}")

    @property
    def y(self) -> np.ndarray:
        return self.samples["y"].to_numpy(np.float64)

    @property
    def y_hat(self) -> np.ndarray:
        return self.samples["y_hat"].to_numpy(np.float64)

    @property
    def errors_wp(self) -> np.ndarray:
        return (self.y_hat - self.y) * self.samples["p_nom_wp"].to_numpy(np.float64)

    @property
    def mae_rel(self) -> float:
        return mae(self.y_hat, self.y)

    @property
    def mae_pct(self) -> float:
        return 100.0 * self.mae_rel

    @property
    def mae_wp(self) -> float:
        return float(np.mean(np.abs(self.errors_wp)))

    @property
    def rmse_pct(self) -> float:
        return 100.0 * rmse(self.y_hat, self.y)

    @property
    def rmse_wp(self) -> float:
        return float(np.sqrt(np.mean(self.errors_wp**2)))

    def fold_mae(self) -> pd.DataFrame:
        """MAE of every fold, in percent and Wp."""
        frame = self.samples.assign(
            abs_pct=100.0 * np.abs(self.y_hat - self.y), abs_wp=np.abs(self.errors_wp)
        )
        return frame.groupby("fold")[["abs_pct", "abs_wp"]].mean().rename(
            columns={"abs_pct": "mae_pct", "abs_wp": "mae_wp"}
        )

    @property
    def std_mae_pct(self) -> float:
        return _fold_std(self.fold_mae()["mae_pct"].to_numpy())

    @property
    def std_mae_wp(self) -> float:
        return _fold_std(self.fold_mae()["mae_wp"].to_numpy())

    @property
    def sample_std_pct(self) -> float:
        return float(np.std(100.0 * np.abs(self.y_hat - self.y), ddof=1)) if len(self.samples) > 1 else float("nan")

    def row(self) -> dict:
        return {
            "variant": self.variant,
            "mae_pct": self.mae_pct,
            "mae_std_pct": self.std_mae_pct,
            "mae_wp": self.mae_wp,
            "mae_std_wp": self.std_mae_wp,
            "rmse_pct": self.rmse_pct,
            "rmse_wp": self.rmse_wp,
        }


def prediction_table(
    indices: Sequence[int],
    y: Sequence[float],
    y_hat: Sequence[float],
    p_nom_wp: Optional[Sequence[float]] = None,
    module_type: Optional[Sequence[str]] = None,
    fold: int | Sequence[int] = 0,
) -> pd.DataFrame:
    n = len(y)
    return pd.DataFrame(
        {
            "sample_index": np.asarray(indices, dtype=np.int64),
            "module_type": list(module_type) if module_type is not None else [""] * n,
            "fold": np.broadcast_to(np.asarray(fold, dtype=np.int64), (n,)),
            "y": np.asarray(y, dtype=np.float64),
            "y_hat": np.asarray(y_hat, dtype=np.float64),
            "p_nom_wp": np.asarray(p_nom_wp, dtype=np.float64) if p_nom_wp is not None else np.full(n, np.nan),
        },
        columns=SAMPLE_COLUMNS,
    )


def baseline_mean_predictor(
    train_y: Sequence[float],
    test_y: Sequence[float],
    test_p_nom_wp: Optional[Sequence[float]] = None,
    fold: int = 0,
) -> EvalSummary:
    """Predict the mean training target for every test sample."""
    train_y = np.asarray(train_y, dtype=np.float64)
    test_y = np.asarray(test_y, dtype=np.float64)
    if train_y.size == 0:
        raise DataError("Baseline needs a non-empty training set")
    if test_y.size == 0:
        raise DataError("Baseline needs a non-empty test set")
    y_hat = np.full(test_y.shape, np.mean(train_y))
    table = prediction_table(np.arange(test_y.size), test_y, y_hat, test_p_nom_wp, fold=fold)
    return EvalSummary("baseline", table)


def summary_frame(summaries: Sequence[EvalSummary]) -> pd.DataFrame:
    return pd.DataFrame([s.row() for s in summaries], columns=SUMMARY_COLUMNS)
