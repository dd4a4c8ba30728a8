from pathlib import Path

import click

from lumipower.data import ModuleDataset, load_manifest
from lumipower.training import train as train_model

from script.common import config_option, load_run_config, lock_run, start, verbose_option


def report_path(checkpoint: Path) -> Path:
    return checkpoint.with_name(f"{checkpoint.stem}_report.csv")


@click.command(name="train")
@config_option
@click.option("-m", "--manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("-o", "--out", "checkpoint", type=click.Path(dir_okay=False, path_type=Path), required=True, help="Checkpoint file.")
@verbose_option
def train(config_path, manifest, checkpoint, verbose):
    """
    Train one model on every sample of the manifest. Writes the checkpoint,
    `<checkpoint>_report.csv` and run.lock next to it.
    """
    logger = start(verbose, __file__)
    run = load_run_config(config_path)
    samples = load_manifest(manifest)
    dataset = ModuleDataset(samples, run.data, stride=run.model.stride)
    indices = list(range(len(samples)))
    result = train_model(
        dataset, indices, run.model, run.train, checkpoint_path=checkpoint, config_echo=run.echo()
    )
    result.report.to_csv(report_path(checkpoint))
    lock_run(checkpoint.parent, run)
    logger.info(
        f"trained {run.model.head_kind} for {run.train.epochs} epochs "
        f"(final loss {result.report.train_loss[-1]:.6g}, {result.report.wall_clock_s:.1f} s)"
    )
