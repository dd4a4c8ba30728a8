from pathlib import Path

import click

from lumipower.data import DataConfig, prepare_image, read_image
from lumipower.errors import CheckpointError
from lumipower.evaluation import absolute_power
from lumipower.persistence import Checkpoint, load_checkpoint
from lumipower.tensor import no_grad

from script.common import grid_option, p_nom_option, start, verbose_option

checkpoint_option = click.option(
    "--ckpt", "checkpoint_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True
)
image_option = click.option("--image", "image_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)


def run_model(checkpoint: Checkpoint, image_path: Path, grid):
    """Eval-mode forward pass of one module image; returns (model output, raw image shape)."""
    stats = checkpoint.normalization
    if stats is None:
        raise CheckpointError("Checkpoint carries no normalization statistics")
    data_config = DataConfig.from_dict(checkpoint.config.get("data", {}))
    target_shape = data_config.target_shape(*grid, stride=checkpoint.spec.stride)
    raw = read_image(image_path)
    model = checkpoint.build_model()
    model.eval()
    with no_grad():
        output = model(prepare_image(raw, target_shape, stats))
    return output, raw.shape


@click.command(name="predict")
@checkpoint_option
@image_option
@p_nom_option
@grid_option
@verbose_option
def predict(checkpoint_path, image_path, p_nom, grid, verbose):
    """Relative power y and P_mpp = y * P_nom of one module."""
    start(verbose, __file__)
    output, _ = run_model(load_checkpoint(checkpoint_path), image_path, grid)
    y_hat = float(output.y_hat.data[0, 0])
    print(f"y_hat = {y_hat:.6f}")
    print(f"P_mpp = {absolute_power(y_hat, p_nom):.1f} Wp")
