from pathlib import Path

import click

from lumipower.errors import ConfigError
from lumipower.persistence import load_checkpoint
from lumipower.persistence.run_config import RunConfig
from lumipower.powermaps import CellGrid, export_map, integrate_cells
from lumipower.utility.io import atomic_output_dir

from script.common import grid_option, lock_run, p_nom_option, start, verbose_option
from script.predict import checkpoint_option, image_option, run_model


@click.command(name="map")
@checkpoint_option
@image_option
@p_nom_option
@grid_option
@click.option("-o", "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@verbose_option
def power_map(checkpoint_path, image_path, p_nom, grid, out_dir, verbose):
    """
    Regression map of one module: map.csv, map.png (16 bit, image resolution),
    map_cells.csv with the loss of every cell in Wp, and run.lock with the
    configuration echoed by the checkpoint.
    """
    logger = start(verbose, __file__)
    checkpoint = load_checkpoint(checkpoint_path)
    if checkpoint.spec.head_kind != "regression_map":
        raise ConfigError(f"{checkpoint_path} holds a {checkpoint.spec.head_kind} model; maps need regression_map")
    output, image_shape = run_model(checkpoint, image_path, grid)
    regression_map = output.regression_maps()[0]
    cell_grid = CellGrid(*grid, regression_map.shape)
    with atomic_output_dir(out_dir) as staging:
        export_map(regression_map, image_shape, staging, cell_grid, p_nom)
        lock_run(staging, RunConfig.from_echo(checkpoint.config, checkpoint.spec))
    table = integrate_cells(regression_map, cell_grid, p_nom)
    frame = table.to_frame().pivot(index="row_label", columns="col_label", values="loss_wp")
    print(frame.reindex(index=cell_grid.row_labels, columns=cell_grid.col_labels).round(2).to_string())
    logger.info(f"P_mpp = {table.relative_power * p_nom:.1f} Wp, total loss {table.total_loss_wp:.1f} Wp")
