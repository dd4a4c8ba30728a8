import os
import sys
from pathlib import Path
from typing import Tuple

import click

from lumipower.persistence.run_config import RunConfig
from lumipower.utility.io import write_run_lock
from lumipower.utility.logging import config_logging, get_script_logger

config_option = click.option(
    "-c",
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="Run configuration (copy template/lumipower.ini).",
)
verbose_option = click.option("-v", "--verbose", is_flag=True, help="Verbose mode.")


def parse_grid(ctx, param, value) -> Tuple[int, int]:
    """'6x10' -> (6, 10)."""
    try:
        rows, cols = (int(part) for part in value.lower().split("x"))
    except ValueError:
        raise click.BadParameter(f"expected ROWSxCOLS, got {value!r}")
    if rows < 1 or cols < 1:
        raise click.BadParameter(f"grid must be positive, got {value!r}")
    return rows, cols


grid_option = click.option(
    "-g", "--grid", default="6x10", show_default=True, callback=parse_grid, help="Cell grid ROWSxCOLS."
)
p_nom_option = click.option("--p-nom", type=click.FloatRange(min=0, min_open=True), required=True, help="Nominal power [Wp].")


def start(verbose: bool, name: str):
    config_logging(verbose)
    return get_script_logger(os.path.basename(name))


def load_run_config(path: Path) -> RunConfig:
    return RunConfig.load(path)


def command_line() -> list:
    ctx = click.get_current_context()
    argv = (ctx.find_root().obj or {}).get("argv")
    return ["lumipower"] + list(argv if argv is not None else sys.argv[1:])


def lock_run(directory: str | Path, run_config: RunConfig):
    write_run_lock(directory, run_config.to_ini(), command_line())
