import cv2
import numpy as np
import pandas as pd
import pytest

from lumipower.errors import ConfigError, DataError
from lumipower.synth import (
    MANIFEST_COLUMNS,
    SyntheticModuleConfig,
    expected_relative_power,
    generate_dataset,
    generate_sample,
    load_cell_fractions,
    render_module,
    sample_config,
    truth_paths,
)
from lumipower.synth import generator


class TestRenderModule:
    def test_no_defects_means_full_power(self):
        config = SyntheticModuleConfig(defect_density=0.0, rng_seed=3)
        _, truth = render_module(config)
        assert not np.any(truth.per_cell_inactive_fraction)
        assert truth.y == 1.0
        assert truth.p_mpp_wp == config.nominal_power_wp

    def test_one_fully_inactive_cell(self, mocker):
        boxes = iter([(0, 32, 0, 32)])
        mocker.patch.object(generator, "_defect_box", side_effect=lambda rng, px: next(boxes, (0, 0, 0, 0)))
        _, truth = render_module(SyntheticModuleConfig(defect_density=1.0))
        assert truth.per_cell_inactive_fraction[0, 0] == 1.0
        assert np.count_nonzero(truth.per_cell_inactive_fraction) == 1
        assert truth.y == pytest.approx(1 - 1 / 60, abs=1e-15)

    def test_fixed_seed_is_bit_identical(self):
        config = SyntheticModuleConfig(rng_seed=11)
        counts_a, truth_a = render_module(config)
        counts_b, truth_b = render_module(config)
        assert np.array_equal(counts_a, counts_b)
        assert np.array_equal(truth_a.per_cell_inactive_fraction, truth_b.per_cell_inactive_fraction)
        assert truth_a.y == truth_b.y

    def test_counts_range_and_shape(self):
        counts, _ = render_module(SyntheticModuleConfig(rows=6, cols=12, cell_px=16))
        assert counts.dtype == np.uint16
        assert counts.shape == (96, 192)
        assert counts.max() <= 28000

    @pytest.mark.parametrize("seed", range(5))
    def test_mask_pixel_count_reproduces_fractions(self, seed):
        config = SyntheticModuleConfig(defect_density=0.6, rng_seed=seed)
        _, truth = render_module(config)
        px = config.cell_px
        for r in range(config.rows):
            for c in range(config.cols):
                block = truth.mask[r * px : (r + 1) * px, c * px : (c + 1) * px]
                assert np.count_nonzero(block) / px**2 == truth.per_cell_inactive_fraction[r, c]
        assert truth.y == pytest.approx(1 - truth.per_cell_inactive_fraction.sum() / 60, abs=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_absolute_power_is_consistent(self, seed):
        _, truth = render_module(SyntheticModuleConfig(defect_density=0.5, rng_seed=seed, nominal_power_wp=235.0))
        assert truth.p_mpp_wp / 235.0 == truth.y
        assert np.all(truth.per_cell_loss_wp <= 0)

    def test_bright_defects_do_not_change_label(self):
        config = SyntheticModuleConfig(defect_density=0.5, intensity_ambiguity=1.0, noise_sigma=0.0, rng_seed=2)
        counts, truth = render_module(config)
        dark_config = SyntheticModuleConfig(defect_density=0.5, intensity_ambiguity=0.0, noise_sigma=0.0, rng_seed=2)
        _, dark_truth = render_module(dark_config)
        assert counts[truth.mask].mean() >= counts[~truth.mask].mean()
        assert truth.y == dark_truth.y

    def test_cell_too_small(self):
        with pytest.raises(DataError):
            render_module(SyntheticModuleConfig(cell_px=6))

    def test_generate_sample_tensor_shape(self):
        image, _ = generate_sample(SyntheticModuleConfig(cell_px=8))
        assert image.shape == (1, 1, 48, 80)


def test_mean_relative_power_matches_expectation():
    config = SyntheticModuleConfig(defect_density=0.4, cell_px=16, noise_sigma=0.0, cycle_presets=False)
    ys = np.array([render_module(sample_config(config, i))[1].y for i in range(500)])
    standard_error = ys.std(ddof=1) / np.sqrt(len(ys))
    assert abs(ys.mean() - expected_relative_power(config)) < 3 * standard_error


def test_density_spread_widens_relative_power_range():
    fixed = SyntheticModuleConfig(defect_density=0.4, cell_px=16, noise_sigma=0.0, cycle_presets=False)
    spread = SyntheticModuleConfig(
        defect_density=0.4, density_spread=0.4, cell_px=16, noise_sigma=0.0, cycle_presets=False
    )
    fixed_ys = np.array([render_module(sample_config(fixed, i))[1].y for i in range(200)])
    ys = np.array([render_module(sample_config(spread, i))[1].y for i in range(200)])
    assert ys.min() <= 0.7 and ys.max() >= 0.95
    assert ys.std() > 2 * fixed_ys.std()
    standard_error = ys.std(ddof=1) / np.sqrt(len(ys))
    assert abs(ys.mean() - expected_relative_power(spread)) < 3 * standard_error


def test_invalid_density_spread():
    with pytest.raises(ConfigError):
        SyntheticModuleConfig(density_spread=1.5)


class TestGenerateDataset:
    def test_single_sample(self, tmp_path):
        manifest = generate_dataset(SyntheticModuleConfig(cell_px=8), 1, tmp_path)
        assert len(manifest) == 1
        image_path = tmp_path / manifest.loc[0, "path"]
        assert image_path.exists()
        mask_path, cells_path = truth_paths(image_path)
        assert mask_path.exists() and cells_path.exists()

    def test_manifest_schema_and_geometries(self, tmp_path):
        generate_dataset(SyntheticModuleConfig(cell_px=8), 54, tmp_path)
        manifest = pd.read_csv(tmp_path / "manifest.csv", float_precision="round_trip")
        assert list(manifest.columns) == MANIFEST_COLUMNS
        assert len(manifest) == 54
        assert len(manifest[["rows", "cols"]].drop_duplicates()) >= 2
        assert set(manifest["module_type"]) == set("ABCDEF")
        np.testing.assert_array_equal(manifest["p_mpp_wp"] / manifest["p_nom_wp"], manifest["y"])

    def test_written_files_round_trip(self, tmp_path):
        config = SyntheticModuleConfig(cell_px=8, rng_seed=5)
        manifest = generate_dataset(config, 2, tmp_path)
        counts, truth = render_module(sample_config(config, 1))
        image_path = tmp_path / manifest.loc[1, "path"]
        assert np.array_equal(cv2.imread(image_path.as_posix(), cv2.IMREAD_UNCHANGED), counts)
        np.testing.assert_array_equal(load_cell_fractions(image_path), truth.per_cell_inactive_fraction)

    def test_parallel_matches_serial(self, tmp_path):
        config = SyntheticModuleConfig(cell_px=8, rng_seed=9)
        serial = generate_dataset(config, 4, tmp_path / "serial")
        parallel = generate_dataset(config, 4, tmp_path / "parallel", processes=2)
        pd.testing.assert_frame_equal(serial, parallel)
        for path in serial["path"]:
            assert (tmp_path / "serial" / path).read_bytes() == (tmp_path / "parallel" / path).read_bytes()

    def test_zero_samples(self, tmp_path):
        with pytest.raises(DataError):
            generate_dataset(SyntheticModuleConfig(), 0, tmp_path)

    def test_unwritable_directory(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(DataError):
            generate_dataset(SyntheticModuleConfig(cell_px=8), 1, blocker / "out")
