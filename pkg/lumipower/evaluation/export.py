import os
from pathlib import Path

import numpy as np
import pandas as pd

from lumipower.utility.logging import get_script_logger

from .cross_validation import CrossValidationResult
from .metrics import EvalSummary, absolute_power

FLOAT_FORMAT = "%.17g"
BAND_WP = 15.0
SCATTER_COLUMNS = ["p_mpp_true_wp", "p_mpp_pred_wp", "module_type", "fold", "outside_band"]
SUMMARY_NAME = "summary.csv"
FOLDS_NAME = "folds.csv"

logger = get_script_logger(os.path.basename(__file__))


def scatter_frame(summary: EvalSummary, band_wp: float = BAND_WP) -> pd.DataFrame:
    samples = summary.samples
    p_nom = samples["p_nom_wp"].to_numpy(np.float64)
    true_wp = absolute_power(samples["y"].to_numpy(np.float64), p_nom)
    pred_wp = absolute_power(samples["y_hat"].to_numpy(np.float64), p_nom)
    return pd.DataFrame(
        {
            "p_mpp_true_wp": true_wp,
            "p_mpp_pred_wp": pred_wp,
            "module_type": samples["module_type"].to_numpy(),
            "fold": samples["fold"].to_numpy(),
            "outside_band": np.abs(pred_wp - true_wp) > band_wp,
        },
        columns=SCATTER_COLUMNS,
    )


def export_scatter(summary: EvalSummary, path: str | Path, band_wp: float = BAND_WP) -> pd.DataFrame:
    """Plot-ready predicted vs. true P_mpp; `outside_band` marks |error| > band_wp."""
    frame = scatter_frame(summary, band_wp)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return frame


def scatter_name(variant: str) -> str:
    return f"scatter_{variant}.csv"


def report_name(variant: str, fold: int) -> str:
    return f"train_{variant}_fold{fold}.csv"


def write_cross_validation(result: CrossValidationResult, out_dir: str | Path):
    """summary.csv, folds.csv, one scatter CSV per variant and every fold's training report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.summary_frame().to_csv(out_dir / SUMMARY_NAME, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    result.split.to_csv(out_dir / FOLDS_NAME)
    for name, summary in result.summaries.items():
        export_scatter(summary, out_dir / scatter_name(name))
    for name, reports in result.reports.items():
        for fold, report in enumerate(reports):
            report.to_csv(out_dir / report_name(name, fold))
    logger.info(f"wrote cross-validation results to {out_dir}")
