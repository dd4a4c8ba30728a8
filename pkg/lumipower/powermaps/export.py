import os
from pathlib import Path
from typing import Dict, Optional, Tuple

import cv2
import numpy as np
import pandas as pd

from lumipower.errors import DataError
from lumipower.model import RegressionMap
from lumipower.utility.logging import get_script_logger

from .cells import CellGrid, integrate_cells

FLOAT_FORMAT = "%.17g"
PNG_SCALE = 65535

logger = get_script_logger(os.path.basename(__file__))


def upsample_nearest(values: np.ndarray, image_shape: Tuple[int, int]) -> np.ndarray:
    height, width = image_shape
    return cv2.resize(np.asarray(values, dtype=np.float64), (width, height), interpolation=cv2.INTER_NEAREST)


def encode_png(values: np.ndarray) -> np.ndarray:
    """Loss magnitude to 16 bit: 0 -> 0, a loss of the whole nominal power (or more) -> 65535."""
    magnitude = np.clip(-np.asarray(values, dtype=np.float64), 0.0, 1.0)
    return np.round(magnitude * PNG_SCALE).astype(np.uint16)


def write_map_csv(values: np.ndarray, path: str | Path):
    pd.DataFrame(np.asarray(values, dtype=np.float64)).to_csv(
        path, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )


def read_map_csv(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Map not found: {path}")
    return pd.read_csv(path, header=None, dtype=np.float64, float_precision="round_trip").to_numpy()


def export_map(
    regression_map: RegressionMap | np.ndarray,
    image_shape: Tuple[int, int],
    out_dir: str | Path,
    grid: Optional[CellGrid] = None,
    p_nom_wp: Optional[float] = None,
    stem: str = "map",
) -> Dict[str, Path]:
    """
    Write `<stem>.csv` (native resolution), `<stem>.png` (16-bit, nearest
    neighbour at `image_shape`) and, with a grid and nominal power,
    `<stem>_cells.csv` with the per-cell loss in Wp.
    """
    values = np.asarray(getattr(regression_map, "values", regression_map), dtype=np.float64)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"map": out_dir / f"{stem}.csv", "png": out_dir / f"{stem}.png"}

    write_map_csv(values, paths["map"])
    if not cv2.imwrite(paths["png"].as_posix(), encode_png(upsample_nearest(values, image_shape))):
        raise DataError(f"Could not write {paths['png']}")
    if grid is not None and p_nom_wp is not None:
        paths["cells"] = out_dir / f"{stem}_cells.csv"
        table = integrate_cells(values, grid, p_nom_wp)
        table.to_frame().to_csv(paths["cells"], index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"exported {values.shape} map to {out_dir}")
    return paths
