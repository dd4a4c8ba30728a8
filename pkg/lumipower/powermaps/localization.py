import numpy as np
from scipy.stats import spearmanr

from lumipower.errors import DataError, ShapeError
from lumipower.synth import GroundTruth

from .cells import CellLossTable


def localization_score(table: CellLossTable, truth: GroundTruth | np.ndarray) -> float:
    """
    Spearman rank correlation between the predicted loss magnitude of every
    cell and its true inactive fraction.
    """
    fractions = np.asarray(getattr(truth, "per_cell_inactive_fraction", truth), dtype=np.float64)
    predicted = -np.asarray(table.relative_loss, dtype=np.float64)
    if predicted.shape != fractions.shape:
        raise ShapeError(f"Predicted cells {predicted.shape} do not match the true grid {fractions.shape}")
    if np.ptp(predicted) == 0 or np.ptp(fractions) == 0:
        raise DataError("Rank correlation is undefined for constant inputs")
    rho, _ = spearmanr(predicted.ravel(), fractions.ravel())
    return float(rho)


def count_defective_cells(fractions: np.ndarray) -> int:
    return int(np.count_nonzero(np.asarray(fractions) > 0))
