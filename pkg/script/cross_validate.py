from pathlib import Path

import click

from lumipower.data import load_manifest
from lumipower.evaluation import STORE_NAME, CrossValidationStore, run_cross_validation, write_cross_validation
from lumipower.utility.cli_color import bcolors, colored
from lumipower.utility.io import atomic_output_dir

from script.common import config_option, load_run_config, lock_run, start, verbose_option


@click.command(name="cv")
@config_option
@click.option("-m", "--manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--save-checkpoints", is_flag=True, help="Keep the checkpoint of every fold.")
@verbose_option
def cross_validate(config_path, manifest, out_dir, save_checkpoints, verbose):
    """
    Stratified cross-validation of both heads and the mean-predictor baseline.
    Writes summary.csv, one scatter CSV per variant, training reports,
    cv_store.h5 and run.lock.
    """
    logger = start(verbose, __file__)
    run = load_run_config(config_path)
    samples = load_manifest(manifest)
    with atomic_output_dir(out_dir) as staging:
        result = run_cross_validation(
            samples,
            run.model,
            run.train,
            run.cv,
            run.data,
            checkpoint_dir=staging / "checkpoints" if save_checkpoints else None,
        )
        write_cross_validation(result, staging)
        with CrossValidationStore(staging / STORE_NAME, "w") as store:
            store.write_result(result, run.to_ini())
        lock_run(staging, run)

    for name in result.underperforming:
        print(colored(f"{name} does not beat the mean-predictor baseline", bcolors.WARNING))
    logger.info(f"cross-validation of {len(samples)} modules written to {out_dir}")
