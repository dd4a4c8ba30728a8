import math
import string
from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np
import pandas as pd

from lumipower.errors import DataError
from lumipower.model import RegressionMap

CELL_COLUMNS = ["row_label", "col_label", "loss_wp"]


def row_label(row: int) -> str:
    """0 -> "A", 25 -> "Z", 26 -> "AA"."""
    label = ""
    row += 1
    while row:
        row, rest = divmod(row - 1, 26)
        label = string.ascii_uppercase[rest] + label
    return label


@dataclass(frozen=True)
class CellGrid:
    """
    Cell layout of a module laid over a regression map. Rows are labelled
    with letters from the top, columns with numbers from the left.

    Attributes
    ----------
    rows, cols : int
    map_shape : Tuple[int, int]
        (h, w) of the map; every cell covers an equal (h/rows) x (w/cols) block.
    """

    rows: int
    cols: int
    map_shape: Tuple[int, int]

    def __post_init__(self):
        h, w = self.map_shape
        if self.rows < 1 or self.cols < 1:
            raise DataError(f"Grid must be positive, got {self.rows}x{self.cols}")
        if h % self.rows or w % self.cols or h < self.rows or w < self.cols:
            raise DataError(f"A {self.rows}x{self.cols} grid does not tile a {h}x{w} map")

    @property
    def block_shape(self) -> Tuple[int, int]:
        return self.map_shape[0] // self.rows, self.map_shape[1] // self.cols

    @property
    def row_labels(self) -> List[str]:
        return [row_label(r) for r in range(self.rows)]

    @property
    def col_labels(self) -> List[str]:
        return [str(c + 1) for c in range(self.cols)]

    def box(self, row: int, col: int) -> Tuple[slice, slice]:
        bh, bw = self.block_shape
        return slice(row * bh, (row + 1) * bh), slice(col * bw, (col + 1) * bw)

    def cells(self) -> Iterator[Tuple[int, int]]:
        for row in range(self.rows):
            for col in range(self.cols):
                yield row, col

    def pixel_counts(self) -> np.ndarray:
        bh, bw = self.block_shape
        return np.full((self.rows, self.cols), bh * bw, dtype=np.int64)


@dataclass
class CellLossTable:
    """
    Attributes
    ----------
    relative_loss : np.ndarray
        (rows, cols) integrated map per cell, in fractions of nominal power.
    p_nom_wp : float
    grid : CellGrid
    """

    relative_loss: np.ndarray
    p_nom_wp: float
    grid: CellGrid

    @property
    def loss_wp(self) -> np.ndarray:
        return self.relative_loss * self.p_nom_wp

    @property
    def total_relative_loss(self) -> float:
        return math.fsum(self.relative_loss.ravel())

    @property
    def total_loss_wp(self) -> float:
        return math.fsum(self.loss_wp.ravel())

    @property
    def relative_power(self) -> float:
        return 1.0 + self.total_relative_loss

    def to_frame(self) -> pd.DataFrame:
        labels = [(self.grid.row_labels[r], self.grid.col_labels[c]) for r, c in self.grid.cells()]
        return pd.DataFrame(
            {
                "row_label": [r for r, _ in labels],
                "col_label": [c for _, c in labels],
                "loss_wp": self.loss_wp.ravel(),
            },
            columns=CELL_COLUMNS,
        )


def integrate_cells(regression_map: RegressionMap | np.ndarray, grid: CellGrid, p_nom_wp: float) -> CellLossTable:
    """Sum the map over every cell of `grid` (compensated summation)."""
    values = np.asarray(getattr(regression_map, "values", regression_map), dtype=np.float64)
    if values.shape != tuple(grid.map_shape):
        raise DataError(f"Map {values.shape} does not match the grid's map shape {grid.map_shape}")
    relative = np.empty((grid.rows, grid.cols), dtype=np.float64)
    for row, col in grid.cells():
        relative[row, col] = math.fsum(values[grid.box(row, col)].ravel())
    return CellLossTable(relative_loss=relative, p_nom_wp=float(p_nom_wp), grid=grid)
