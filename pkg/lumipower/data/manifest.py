import os
from dataclasses import dataclass
from pathlib import Path
from typing import List

import pandas as pd

from lumipower.errors import DataError
from lumipower.synth.generator import MANIFEST_COLUMNS
from lumipower.utility.logging import get_script_logger

MAX_RELATIVE_POWER = 1.05
CONSISTENCY_TOLERANCE = 1e-9

logger = get_script_logger(os.path.basename(__file__))


@dataclass
class ModuleSample:
    """
    One manifest row.

    Attributes
    ----------
    image_path : Path
        Absolute path of the PL image.
    y : float
        Relative power p_mpp / p_nom (regression target).
    p_nom_wp, p_mpp_wp : float
    module_type : str
    rows, cols : int
        Cell grid.
    """

    image_path: Path
    y: float
    p_nom_wp: float
    p_mpp_wp: float
    module_type: str
    rows: int
    cols: int

    @property
    def geometry(self):
        return self.rows, self.cols


def load_manifest(path: str | Path) -> List[ModuleSample]:
    """
    Parse a manifest CSV. Image paths are resolved relative to the manifest
    directory. Samples keep manifest order.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    try:
        table = pd.read_csv(path, dtype={"module_type": str, "path": str}, float_precision="round_trip")
    except pd.errors.EmptyDataError as err:
        raise DataError(f"{path}: empty dataset") from err
    if list(table.columns) != MANIFEST_COLUMNS:
        raise DataError(f"{path}: header {list(table.columns)} does not match {MANIFEST_COLUMNS}")
    if table.empty:
        raise DataError(f"{path}: empty dataset")

    samples = []
    for row, record in enumerate(table.itertuples(index=False)):
        image_path = (path.parent / record.path).resolve()
        if not image_path.exists():
            raise DataError(f"{path} row {row}: image file not found: {image_path}")
        y, p_nom, p_mpp = float(record.y), float(record.p_nom_wp), float(record.p_mpp_wp)
        if not 0.0 < y <= MAX_RELATIVE_POWER:
            raise DataError(f"{path} row {row}: y={y} outside (0, {MAX_RELATIVE_POWER}]")
        if not p_nom > 0:
            raise DataError(f"{path} row {row}: p_nom_wp={p_nom} must be positive")
        if abs(y - p_mpp / p_nom) > CONSISTENCY_TOLERANCE:
            raise DataError(f"{path} row {row}: y={y!r} != p_mpp_wp / p_nom_wp = {p_mpp / p_nom!r}")
        if record.rows < 1 or record.cols < 1:
            raise DataError(f"{path} row {row}: invalid grid {record.rows}x{record.cols}")
        samples.append(
            ModuleSample(
                image_path=image_path,
                y=y,
                p_nom_wp=p_nom,
                p_mpp_wp=p_mpp,
                module_type=str(record.module_type),
                rows=int(record.rows),
                cols=int(record.cols),
            )
        )
    logger.debug(f"loaded {len(samples)} samples from {path}")
    return samples
