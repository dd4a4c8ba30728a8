from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from lumipower.data import DataConfig, load_manifest, prepare_image, read_image
from lumipower.model import ForwardOutput
from lumipower.persistence import load_checkpoint
from lumipower.persistence.run_config import RunConfig
from lumipower.powermaps import read_map_csv
from lumipower.tensor import Tensor, no_grad
from lumipower.training import Trainer
from lumipower.utility.io import RUN_LOCK_NAME

from script.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(scope="module")
def dataset_dir(quick_config_path, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("cli") / "dataset"
    assert main(["synth", "-c", str(quick_config_path), "-o", str(out_dir), "-n", "9"]) == EXIT_OK
    return out_dir


@pytest.fixture(scope="module")
def checkpoint_path(quick_config_path, dataset_dir):
    path = dataset_dir.parent / "model" / "map.lpw"
    argv = ["train", "-c", str(quick_config_path), "-m", str(dataset_dir / "manifest.csv"), "-o", str(path)]
    assert main(argv) == EXIT_OK
    return path


def test_unknown_flag_is_a_usage_error(capsys):
    assert main(["predict", "--bogus"]) == EXIT_USAGE
    assert "Usage" in capsys.readouterr().err


def test_missing_config_is_a_usage_error(tmp_path):
    assert main(["synth", "-c", str(tmp_path / "absent.ini"), "-o", str(tmp_path / "d"), "-n", "1"]) == EXIT_USAGE


def test_synth_writes_dataset_and_run_lock(dataset_dir, quick_config_path):
    manifest = load_manifest(dataset_dir / "manifest.csv")
    assert len(manifest) == 9
    lock = (dataset_dir / RUN_LOCK_NAME).read_text()
    assert lock.startswith("# command: lumipower synth")
    assert "[SYNTH]" in lock


def test_train_writes_checkpoint_and_report(checkpoint_path):
    checkpoint = load_checkpoint(checkpoint_path)
    assert checkpoint.config["train"]["weight_decay"] == 0.1
    assert checkpoint.normalization is not None
    report = pd.read_csv(checkpoint_path.with_name("map_report.csv"))
    assert report["epoch"].tolist() == [1, 2]
    assert (checkpoint_path.parent / RUN_LOCK_NAME).exists()


def test_predict_prints_absolute_power(checkpoint_path, dataset_dir, mocker, capsys):
    mocker.patch("script.predict.run_model", return_value=(ForwardOutput(y_hat=Tensor([[0.85]])), (64, 64)))
    image = dataset_dir / "images" / "sample_0000.png"
    assert main(["predict", "--ckpt", str(checkpoint_path), "--image", str(image), "--p-nom", "240", "-g", "2x2"]) == 0
    assert "P_mpp = 204.0 Wp" in capsys.readouterr().out


def test_predict_matches_library(checkpoint_path, dataset_dir, capsys):
    image = dataset_dir / "images" / "sample_0001.png"
    assert main(["predict", "--ckpt", str(checkpoint_path), "--image", str(image), "--p-nom", "245", "-g", "2x2"]) == 0
    out = capsys.readouterr().out

    checkpoint = load_checkpoint(checkpoint_path)
    model = checkpoint.build_model()
    model.eval()
    target = DataConfig.from_dict(checkpoint.config["data"]).target_shape(2, 2)
    with no_grad():
        y_hat = float(model(prepare_image(read_image(image), target, checkpoint.normalization)).y_hat.data[0, 0])
    assert f"P_mpp = {y_hat * 245:.1f} Wp" in out
    assert y_hat * 245 / 245 == pytest.approx(y_hat, abs=1e-12)


def test_map_exports(checkpoint_path, dataset_dir, tmp_path):
    image = dataset_dir / "images" / "sample_0002.png"
    out_dir = tmp_path / "map"
    argv = ["map", "--ckpt", str(checkpoint_path), "--image", str(image), "--p-nom", "240", "-g", "2x2", "-o", str(out_dir)]
    assert main(argv) == EXIT_OK
    assert {p.name for p in out_dir.iterdir()} == {"map.csv", "map.png", "map_cells.csv", RUN_LOCK_NAME}
    lock = (out_dir / RUN_LOCK_NAME).read_text()
    assert lock.startswith("# command: lumipower map")
    assert RunConfig.from_text(lock).train.weight_decay == 0.1
    cells = pd.read_csv(out_dir / "map_cells.csv")
    assert len(cells) == 4 and np.all(cells["loss_wp"] <= 0)


def test_map_grid_must_be_positive(checkpoint_path, dataset_dir, tmp_path):
    image = dataset_dir / "images" / "sample_0002.png"
    argv = ["map", "--ckpt", str(checkpoint_path), "--image", str(image), "--p-nom", "240", "-g", "2x0", "-o", str(tmp_path)]
    assert main(argv) == EXIT_USAGE


def test_corrupt_checkpoint_is_a_data_error(checkpoint_path, dataset_dir, tmp_path):
    broken = tmp_path / "broken.lpw"
    broken.write_bytes(checkpoint_path.read_bytes()[:100])
    image = dataset_dir / "images" / "sample_0000.png"
    assert main(["predict", "--ckpt", str(broken), "--image", str(image), "--p-nom", "240"]) == EXIT_DATA


def test_non_finite_loss_exit_code(quick_config_path, dataset_dir, tmp_path, mocker):
    mocker.patch.object(Trainer, "train_step", return_value=float("nan"))
    argv = ["train", "-c", str(quick_config_path), "-m", str(dataset_dir / "manifest.csv"), "-o", str(tmp_path / "m.lpw")]
    assert main(argv) == EXIT_NUMERIC
    assert not (tmp_path / "m.lpw").exists()


def test_invalid_thread_count(monkeypatch, dataset_dir, tmp_path):
    monkeypatch.setenv("LUMIPOWER_THREADS", "many")
    assert main(["report", "-d", str(dataset_dir)]) == EXIT_DATA


def test_cv_and_report(quick_config_path, dataset_dir, tmp_path, capsys):
    out_dir = tmp_path / "cv"
    argv = ["cv", "-c", str(quick_config_path), "-m", str(dataset_dir / "manifest.csv"), "-o", str(out_dir)]
    assert main(argv) == EXIT_OK
    assert len(pd.read_csv(out_dir / "scatter_regression_map.csv")) == 9
    assert {"summary.csv", "cv_store.h5", RUN_LOCK_NAME} <= {p.name for p in out_dir.iterdir()}

    assert main(["report", "-d", str(out_dir)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Cross-validation summary" in out and "baseline" in out


def test_report_needs_a_cv_directory(dataset_dir):
    assert main(["report", "-d", str(dataset_dir)]) == EXIT_DATA


def test_fold_checkpoint_maps_at_its_own_resolution(quick_config_path, dataset_dir, tmp_path):
    run = RunConfig.load(quick_config_path)
    run.data = replace(run.data, map_px_per_cell=2)
    run.cv = replace(run.cv, variants=("regression_map",))
    config_path = tmp_path / "fine.ini"
    config_path.write_text(run.to_ini(), encoding="utf-8")
    out_dir = tmp_path / "cv"
    argv = ["cv", "-c", str(config_path), "-m", str(dataset_dir / "manifest.csv"), "-o", str(out_dir), "--save-checkpoints"]
    assert main(argv) == EXIT_OK

    checkpoint = out_dir / "checkpoints" / "regression_map_fold0.lpw"
    image = dataset_dir / "images" / "sample_0003.png"
    argv = ["map", "--ckpt", str(checkpoint), "--image", str(image), "--p-nom", "240", "-g", "2x2", "-o", str(tmp_path / "map")]
    assert main(argv) == EXIT_OK
    assert read_map_csv(tmp_path / "map" / "map.csv").shape == (4, 4)
