__doc__ = """
Synthetic photoluminescence module images with exact per-cell ground truth.

Each cell is a flat block of jittered intensity crossed by dark busbars and
separated by dark gaps. A cell carries, with probability `defect_density`
(drawn per module when `density_spread` is set),
one inactive region (rectangle, half cell or full cell). An inactive region
renders dark, or bright with probability `intensity_ambiguity`, so its
appearance does not determine the label. The relative power is
1 - (inactive cell area) / (number of cells).
"""

import math
import multiprocessing as mp
import os
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path
from typing import Tuple

import cv2
import numpy as np
import pandas as pd
from tqdm import tqdm

from lumipower.errors import DataError
from lumipower.tensor import Tensor
from lumipower.utility.logging import get_script_logger

from .config import MIN_CELL_PX, MODULE_TYPES, SyntheticModuleConfig

INTENSITY_MAX = 28000
BASE_INTENSITY = 18000.0
CELL_JITTER = 0.08
DARK_FACTOR = (0.05, 0.3)
BRIGHT_FACTOR = (1.15, 1.4)
BUSBAR_LEVEL = 0.55
GAP_LEVEL = 0.2
BUSBARS_PER_CELL = 3
# rectangle, half cell, full cell
SHAPE_PROBABILITIES = (0.5, 0.4, 0.1)

MANIFEST_NAME = "manifest.csv"
MANIFEST_COLUMNS = ["path", "y", "p_nom_wp", "p_mpp_wp", "module_type", "rows", "cols"]
CELL_TABLE_COLUMNS = ["row", "col", "inactive_fraction", "loss_wp"]
FLOAT_FORMAT = "%.17g"

logger = get_script_logger(os.path.basename(__file__))


@dataclass
class GroundTruth:
    """
    Attributes
    ----------
    per_cell_inactive_fraction : np.ndarray
        (rows, cols) inactive area per cell in [0, 1].
    per_cell_loss_wp : np.ndarray
        (rows, cols) nonpositive power loss per cell.
    y : float
        Relative power p_mpp / p_nom.
    p_mpp_wp : float
    mask : np.ndarray
        (H, W) boolean inactive mask at image resolution.
    """

    per_cell_inactive_fraction: np.ndarray
    per_cell_loss_wp: np.ndarray
    y: float
    p_mpp_wp: float
    mask: np.ndarray

    def cell_table(self) -> pd.DataFrame:
        rows, cols = self.per_cell_inactive_fraction.shape
        r, c = np.divmod(np.arange(rows * cols), cols)
        return pd.DataFrame(
            {
                "row": r,
                "col": c,
                "inactive_fraction": self.per_cell_inactive_fraction.reshape(-1),
                "loss_wp": self.per_cell_loss_wp.reshape(-1),
            },
            columns=CELL_TABLE_COLUMNS,
        )


def absolute_from_relative(y: float, p_nom_wp: float) -> float:
    """
    y * p_nom, nudged by at most a few ulp so that p_mpp / p_nom == y holds
    exactly for the written manifest.
    """
    p_mpp = y * p_nom_wp
    candidate = p_mpp
    for _ in range(4):
        if candidate / p_nom_wp == y:
            return float(candidate)
        candidate = np.nextafter(candidate, math.inf if candidate / p_nom_wp < y else -math.inf)
    return p_mpp


def _defect_box(rng: np.random.Generator, cell_px: int) -> Tuple[int, int, int, int]:
    """(row0, row1, col0, col1) of the inactive region inside one cell."""
    kind = rng.choice(3, p=SHAPE_PROBABILITIES)
    if kind == 0:
        low = max(1, cell_px // 4)
        height, width = rng.integers(low, cell_px + 1, size=2)
        row0 = rng.integers(0, cell_px - height + 1)
        col0 = rng.integers(0, cell_px - width + 1)
        return int(row0), int(row0 + height), int(col0), int(col0 + width)
    if kind == 1:
        half = cell_px // 2
        side = rng.integers(4)
        return [
            (0, half, 0, cell_px),
            (cell_px - half, cell_px, 0, cell_px),
            (0, cell_px, 0, half),
            (0, cell_px, cell_px - half, cell_px),
        ][side]
    return 0, cell_px, 0, cell_px


def expected_inactive_fraction(cell_px: int) -> float:
    """Mean inactive fraction of a defective cell under the shape sampler."""
    low = max(1, cell_px // 4)
    side = (low + cell_px) / 2
    rectangle = side * side / cell_px**2
    half = (cell_px // 2) / cell_px
    p_rect, p_half, p_full = SHAPE_PROBABILITIES
    return p_rect * rectangle + p_half * half + p_full * 1.0


def expected_relative_power(config: SyntheticModuleConfig) -> float:
    return 1.0 - config.defect_density * expected_inactive_fraction(config.cell_px)


def render_module(config: SyntheticModuleConfig) -> Tuple[np.ndarray, GroundTruth]:
    """
    Render one module as 16-bit counts.

    Returns
    -------
    counts : np.ndarray
        (H, W) uint16 image in [0, INTENSITY_MAX].
    truth : GroundTruth
    """
    cell_px = config.cell_px
    if cell_px < MIN_CELL_PX:
        raise DataError(f"cell_px={cell_px} is too small to render busbars (needs >= {MIN_CELL_PX})")
    rng = np.random.default_rng(config.rng_seed)
    density = config.defect_density
    if config.density_spread > 0:
        density = float(np.clip(density + config.density_spread * (2.0 * rng.random() - 1.0), 0.0, 1.0))
    rows, cols = config.rows, config.cols
    height, width = config.image_shape

    intensity = np.empty((height, width), dtype=np.float32)
    mask = np.zeros((height, width), dtype=bool)
    fractions = np.zeros((rows, cols), dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            window = np.s_[r * cell_px : (r + 1) * cell_px, c * cell_px : (c + 1) * cell_px]
            intensity[window] = BASE_INTENSITY * (1.0 + CELL_JITTER * rng.standard_normal())
            if rng.random() >= density:
                continue
            row0, row1, col0, col1 = _defect_box(rng, cell_px)
            if rng.random() < config.intensity_ambiguity:
                factor = rng.uniform(*BRIGHT_FACTOR)
            else:
                factor = rng.uniform(*DARK_FACTOR)
            cell_intensity = intensity[window]
            cell_intensity[row0:row1, col0:col1] *= factor
            cell_mask = mask[window]
            cell_mask[row0:row1, col0:col1] = True
            fractions[r, c] = np.count_nonzero(cell_mask) / cell_px**2

    busbar = BUSBAR_LEVEL * BASE_INTENSITY
    for c in range(cols):
        for k in range(1, BUSBARS_PER_CELL + 1):
            x = c * cell_px + (k * cell_px) // (BUSBARS_PER_CELL + 1)
            cv2.line(intensity, (x, 0), (x, height - 1), busbar, 1)
    gap = GAP_LEVEL * BASE_INTENSITY
    for r in range(1, rows):
        cv2.line(intensity, (0, r * cell_px), (width - 1, r * cell_px), gap, 1)
    for c in range(1, cols):
        cv2.line(intensity, (c * cell_px, 0), (c * cell_px, height - 1), gap, 1)

    if config.noise_sigma > 0:
        intensity += rng.normal(0.0, config.noise_sigma, size=intensity.shape).astype(np.float32)
    counts = np.clip(np.rint(intensity), 0, INTENSITY_MAX).astype(np.uint16)

    n_cells = rows * cols
    y = 1.0 - math.fsum(fractions.reshape(-1)) / n_cells
    p_nom = float(config.nominal_power_wp)
    truth = GroundTruth(
        per_cell_inactive_fraction=fractions,
        per_cell_loss_wp=-fractions * p_nom / n_cells,
        y=y,
        p_mpp_wp=absolute_from_relative(y, p_nom),
        mask=mask,
    )
    return counts, truth


def generate_sample(config: SyntheticModuleConfig) -> Tuple[Tensor, GroundTruth]:
    """Image as a (1, 1, H, W) tensor of counts, plus its ground truth."""
    counts, truth = render_module(config)
    return Tensor(counts[None, None].astype(np.float64)), truth


def sample_config(config: SyntheticModuleConfig, index: int) -> SyntheticModuleConfig:
    """Configuration of the `index`-th sample in a dataset (own RNG stream: seed xor index)."""
    overrides = {"rng_seed": config.rng_seed ^ index}
    if config.cycle_presets:
        module_type = sorted(MODULE_TYPES)[index % len(MODULE_TYPES)]
        rows, cols, p_nom = MODULE_TYPES[module_type]
        overrides.update(rows=rows, cols=cols, nominal_power_wp=p_nom, module_type=module_type)
    return replace(config, **overrides)


def truth_paths(image_path: str | Path) -> Tuple[Path, Path]:
    """Mask PNG and per-cell CSV written next to a generated image."""
    image_path = Path(image_path)
    stem = image_path.with_suffix("")
    return Path(f"{stem}_mask.png"), Path(f"{stem}_cells.csv")


def load_cell_fractions(image_path: str | Path) -> np.ndarray | None:
    """(rows, cols) true inactive fractions of a generated image, or None for foreign images."""
    _, cells_path = truth_paths(image_path)
    if not cells_path.exists():
        return None
    table = pd.read_csv(cells_path, float_precision="round_trip")
    rows, cols = table["row"].max() + 1, table["col"].max() + 1
    fractions = np.zeros((rows, cols))
    fractions[table["row"], table["col"]] = table["inactive_fraction"]
    return fractions


def _write_sample(index: int, config: SyntheticModuleConfig, out_dir: Path) -> dict:
    cfg = sample_config(config, index)
    counts, truth = render_module(cfg)
    relative = Path("images") / f"sample_{index:04d}.png"
    image_path = out_dir / relative
    mask_path, cells_path = truth_paths(image_path)
    if not cv2.imwrite(image_path.as_posix(), counts):
        raise DataError(f"Could not write {image_path}")
    if not cv2.imwrite(mask_path.as_posix(), truth.mask.astype(np.uint8) * 255):
        raise DataError(f"Could not write {mask_path}")
    truth.cell_table().to_csv(cells_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return {
        "path": relative.as_posix(),
        "y": truth.y,
        "p_nom_wp": cfg.nominal_power_wp,
        "p_mpp_wp": truth.p_mpp_wp,
        "module_type": cfg.module_type,
        "rows": cfg.rows,
        "cols": cfg.cols,
    }


def generate_dataset(
    config: SyntheticModuleConfig, n_samples: int, out_dir: str | Path, processes: int = 1
) -> pd.DataFrame:
    """
    Write `n_samples` images, masks and per-cell tables under `out_dir/images`
    and the manifest `out_dir/manifest.csv`. Serial and parallel generation
    produce identical files.
    """
    if n_samples < 1:
        raise DataError(f"n_samples must be >= 1, got {n_samples}")
    out_dir = Path(out_dir)
    try:
        (out_dir / "images").mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise DataError(f"Cannot write dataset to {out_dir}: {err}") from err
    func = partial(_write_sample, config=config, out_dir=out_dir)
    if processes > 1:
        with mp.Pool(processes=processes) as pool:
            records = list(tqdm(pool.imap(func, range(n_samples)), total=n_samples, desc="synth"))
    else:
        records = [func(index) for index in tqdm(range(n_samples), desc="synth")]

    manifest = pd.DataFrame.from_records(records, columns=MANIFEST_COLUMNS)
    manifest.to_csv(out_dir / MANIFEST_NAME, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"wrote {n_samples} samples to {out_dir}")
    return manifest
