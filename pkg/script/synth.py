from pathlib import Path

import click

from lumipower.synth import generate_dataset
from lumipower.utility.io import atomic_output_dir

from script.common import config_option, load_run_config, lock_run, start, verbose_option


@click.command(name="synth")
@config_option
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True, help="Dataset directory.")
@click.option("-n", "--n", "n_samples", type=click.IntRange(min=1), required=True, help="Number of modules.")
@click.option("-p", "--processes", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes.")
@verbose_option
def synth(config_path, out_dir, n_samples, processes, verbose):
    """
    Generate a synthetic PL dataset: images, masks, per-cell tables and
    manifest.csv. Sample i uses the seed `SYNTH.rng_seed xor i`.
    """
    logger = start(verbose, __file__)
    run = load_run_config(config_path)
    with atomic_output_dir(out_dir) as staging:
        manifest = generate_dataset(run.synth, n_samples, staging, processes=processes)
        lock_run(staging, run)
    logger.info(f"{len(manifest)} modules, mean y = {manifest['y'].mean():.4f}")
