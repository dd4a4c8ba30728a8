from pathlib import Path

import click
import numpy as np
import pandas as pd

from lumipower.errors import DataError
from lumipower.evaluation import BASELINE, STORE_NAME, CrossValidationStore
from lumipower.evaluation.export import SUMMARY_NAME
from lumipower.utility.cli_color import bcolors, colored

from script.common import start, verbose_option


def localization_summary(store: CrossValidationStore, variant: str):
    """(median rho, number of scored modules) over modules with enough defective cells."""
    samples = store.load_summary(variant).samples
    if "localization_rho" not in samples:
        return None
    rho = samples["localization_rho"].to_numpy(np.float64)
    rho = rho[np.isfinite(rho)]
    return (float(np.median(rho)) if rho.size else float("nan")), int(rho.size)


@click.command(name="report")
@click.option("-d", "--dir", "run_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@verbose_option
def report(run_dir, verbose):
    """Human-readable summary of a cross-validation run directory."""
    start(verbose, __file__)
    summary_path = run_dir / SUMMARY_NAME
    if not summary_path.exists():
        raise DataError(f"{run_dir} is not a cross-validation run (no {SUMMARY_NAME})")
    summary = pd.read_csv(summary_path)

    print(colored("Cross-validation summary", bcolors.HEADER + bcolors.BOLD))
    print(summary.to_string(index=False, float_format=lambda v: f"{v:.3f}"))
    baseline = summary.loc[summary["variant"] == BASELINE, "mae_pct"]
    if len(baseline):
        for _, row in summary[summary["variant"] != BASELINE].iterrows():
            if row["mae_pct"] > baseline.iloc[0]:
                print(colored(f"{row['variant']}: MAE above the baseline", bcolors.WARNING))
            else:
                print(colored(f"{row['variant']}: {baseline.iloc[0] / row['mae_pct']:.2f}x better than baseline", bcolors.OKGREEN))

    store_path = run_dir / STORE_NAME
    if not store_path.exists():
        return
    with CrossValidationStore(store_path) as store:
        for variant in store.variants():
            localization = localization_summary(store, variant)
            if localization is None:
                continue
            median, count = localization
            print(
                colored(f"{variant}: median cell-loss rank correlation {median:.3f}", bcolors.OKBLUE)
                + f" over {count} modules with >= 3 defective cells"
            )
