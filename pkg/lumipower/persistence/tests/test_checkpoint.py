import struct

import numpy as np
import pytest

from lumipower.errors import CheckpointError
from lumipower.model import ModelSpec, PowerRegressionNet
from lumipower.persistence import Checkpoint, load_checkpoint, save_checkpoint
from lumipower.persistence.checkpoint import FORMAT_VERSION, MAGIC
from lumipower.tensor import Tensor, precision
from lumipower.training import SGD


@pytest.fixture
def checkpoint():
    model = PowerRegressionNet(ModelSpec(head_kind="regression_map"), seed=1)
    optimizer = SGD(model.named_parameters(), 0.1, 0.9)
    for param in model.parameters():
        param.grad = np.ones_like(param.data)
    optimizer.step()
    return Checkpoint.from_model(model, optimizer, {"train": {"weight_decay": 0.1}, "normalization": [0.5, 2.0]})


def test_round_trip_is_bit_exact(checkpoint, tmp_path):
    path = tmp_path / "model.lpw"
    save_checkpoint(path, checkpoint)
    restored = load_checkpoint(path)
    assert restored.spec == checkpoint.spec
    assert restored.config == checkpoint.config
    assert list(restored.tensors) == list(checkpoint.tensors)
    for name, value in checkpoint.tensors.items():
        assert restored.tensors[name].dtype == value.dtype
        assert restored.tensors[name].tobytes() == value.tobytes()
    for name, value in checkpoint.optimizer.items():
        np.testing.assert_array_equal(restored.optimizer[name], value)
    assert restored.normalization == (0.5, 2.0)


def test_rebuilt_model_predicts_identically(checkpoint):
    image = np.random.default_rng(0).normal(size=(2, 1, 64, 96)).astype(np.float32)
    original = PowerRegressionNet(checkpoint.spec)
    original.load_state_dict(checkpoint.tensors)
    original.eval()
    rebuilt = Checkpoint.from_bytes(checkpoint.to_bytes()).build_model()
    rebuilt.eval()
    np.testing.assert_array_equal(original(Tensor(image)).y_hat.data, rebuilt(Tensor(image)).y_hat.data)


def test_float64_precision_preserved():
    with precision(np.float64):
        model = PowerRegressionNet(ModelSpec(head_kind="embedding_linear"))
    rebuilt = Checkpoint.from_bytes(Checkpoint.from_model(model).to_bytes()).build_model()
    assert rebuilt.dtype == np.float64


def test_missing_optimizer_state(checkpoint):
    checkpoint.optimizer = None
    assert Checkpoint.from_bytes(checkpoint.to_bytes()).optimizer is None


def test_truncated_file_fails_checksum(checkpoint):
    data = checkpoint.to_bytes()
    with pytest.raises(CheckpointError, match="checksum"):
        Checkpoint.from_bytes(data[: len(data) // 2])


def test_flipped_byte_fails_checksum(checkpoint):
    data = bytearray(checkpoint.to_bytes())
    data[len(data) // 2] ^= 0xFF
    with pytest.raises(CheckpointError, match="checksum"):
        Checkpoint.from_bytes(bytes(data))


def test_version_checked_before_checksum(checkpoint):
    data = bytearray(checkpoint.to_bytes())
    struct.pack_into("<H", data, len(MAGIC), FORMAT_VERSION + 1)
    with pytest.raises(CheckpointError, match="version"):
        Checkpoint.from_bytes(bytes(data))


def test_bad_magic(checkpoint):
    data = b"NOPE" + checkpoint.to_bytes()[4:]
    with pytest.raises(CheckpointError, match="magic"):
        Checkpoint.from_bytes(data)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "absent.lpw")


def test_full_weights_do_not_fit_mini_model():
    full = Checkpoint.from_model(PowerRegressionNet(ModelSpec.preset("full")))
    mini = PowerRegressionNet(ModelSpec.preset("mini"))
    with pytest.raises(CheckpointError, match="backbone.stem.conv.weight"):
        mini.load_state_dict(full.tensors)
