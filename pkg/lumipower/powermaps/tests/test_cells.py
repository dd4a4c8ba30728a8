import math

import numpy as np
import pytest

from lumipower.errors import DataError
from lumipower.model import ModelSpec, PowerRegressionNet, forward_map
from lumipower.powermaps import CellGrid, integrate_cells, row_label
from lumipower.tensor import precision


def test_labels():
    grid = CellGrid(6, 10, (6, 10))
    assert grid.row_labels == ["A", "B", "C", "D", "E", "F"]
    assert grid.col_labels[0] == "1" and grid.col_labels[-1] == "10"
    assert row_label(26) == "AA"


@pytest.mark.parametrize("rows, cols, map_shape", [(6, 10, (6, 10)), (6, 10, (12, 20)), (6, 12, (18, 36))])
def test_boxes_tile_the_map(rows, cols, map_shape):
    grid = CellGrid(rows, cols, map_shape)
    owner = np.zeros(map_shape, dtype=np.int64)
    for row, col in grid.cells():
        owner[grid.box(row, col)] += 1
    assert np.all(owner == 1)
    assert grid.pixel_counts().sum() == map_shape[0] * map_shape[1]


@pytest.mark.parametrize("map_shape", [(7, 10), (6, 11), (3, 10)])
def test_non_tiling_grid(map_shape):
    with pytest.raises(DataError):
        CellGrid(6, 10, map_shape)


def test_zero_map():
    table = integrate_cells(np.zeros((6, 10)), CellGrid(6, 10, (6, 10)), 240.0)
    assert np.all(table.loss_wp == 0.0)
    assert table.relative_power == 1.0


def test_single_entry_lands_in_its_cell():
    values = np.zeros((6, 10))
    values[1, 2] = -0.01
    table = integrate_cells(values, CellGrid(6, 10, (6, 10)), 230.0)
    frame = table.to_frame().set_index(["row_label", "col_label"])
    assert frame.loc[("B", "3"), "loss_wp"] == pytest.approx(-2.3, abs=1e-12)
    assert (frame["loss_wp"] != 0).sum() == 1
    assert list(table.to_frame().columns) == ["row_label", "col_label", "loss_wp"]


@pytest.mark.parametrize("rows, cols", [(6, 10), (6, 12)])
def test_conservation_on_random_maps(rows, cols):
    rng = np.random.default_rng(rows * cols)
    for factor in range(1, 101):
        k = 1 + factor % 3
        values = -np.abs(rng.normal(scale=0.002, size=(rows * k, cols * k)))
        y_hat = 1.0 + values.sum()
        table = integrate_cells(values, CellGrid(rows, cols, values.shape), 240.0)
        assert table.relative_power == pytest.approx(y_hat, abs=1e-12)
        assert math.fsum(table.loss_wp.ravel()) == pytest.approx((y_hat - 1.0) * 240.0, abs=1e-9)
        assert np.all(table.loss_wp <= 0)


def test_conservation_through_the_network():
    with precision(np.float64):
        model = PowerRegressionNet(ModelSpec(map_bias=True), seed=2)
        model.head.conv.bias.data[...] = 0.01
        model.eval()
        image = np.random.default_rng(1).normal(size=(1, 1, 192, 320))
        y_hat, maps = forward_map(model, image)
    table = integrate_cells(maps[0], CellGrid(6, 10, maps[0].shape), 240.0)
    assert table.relative_power == pytest.approx(y_hat.data[0, 0], abs=1e-12)


def test_map_shape_mismatch():
    with pytest.raises(DataError):
        integrate_cells(np.zeros((6, 12)), CellGrid(6, 10, (6, 10)), 240.0)
