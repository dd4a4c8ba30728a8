import numpy as np
import pytest

from lumipower.errors import ConfigError, ShapeError
from lumipower.tensor import Tensor, precision
from lumipower.training import SGD, SGDState, TrainConfig, mse_loss, sgd_step


def scalar_param(value=1.0, grad=None):
    with precision(np.float64):
        p = Tensor([value], requires_grad=True)
    if grad is not None:
        p.grad = np.array([grad])
    return p


class TestMSE:
    def test_perfect_prediction(self):
        y = Tensor([[0.8], [0.9]])
        assert mse_loss(y, y).item() == 0.0

    def test_arithmetic(self):
        assert mse_loss(Tensor([[1.0], [0.0]]), Tensor([[0.0], [0.0]])).item() == 0.5

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            mse_loss(Tensor(np.zeros((3, 1))), Tensor(np.zeros((2, 1))))


class TestSGDStep:
    def test_plain_step(self):
        p = scalar_param(1.0, 1.0)
        sgd_step({"w.weight": p}, SGDState(), learning_rate=0.1)
        assert p.data[0] == pytest.approx(0.9, abs=1e-15)

    def test_pure_decay(self):
        p = scalar_param(1.0, 0.0)
        sgd_step({"w.weight": p}, SGDState(), learning_rate=0.1, weight_decay=0.1)
        assert p.data[0] == pytest.approx(0.99, abs=1e-15)

    def test_quadratic_bowl(self):
        p = scalar_param(1.0)
        state = SGDState()
        for _ in range(100):
            p.grad = p.data.copy()  # d(p^2/2)/dp
            sgd_step({"p": p}, state, learning_rate=0.1)
        assert p.data[0] == pytest.approx(0.9**100, rel=1e-12)
        assert state.steps == 100

    def test_momentum_accumulates(self):
        p = scalar_param(0.0)
        state = SGDState()
        for _ in range(2):
            p.grad = np.array([1.0])
            sgd_step({"p": p}, state, learning_rate=1.0, momentum=0.5)
        # v1 = 1, v2 = 1.5
        assert p.data[0] == -2.5

    def test_exempt_parameters_match_undecayed_update(self):
        rng = np.random.default_rng(0)
        values, grads = rng.normal(size=5), rng.normal(size=5)
        with precision(np.float64):
            decayed_run = Tensor(values, requires_grad=True)
            plain_run = Tensor(values, requires_grad=True)
        decayed_run.grad, plain_run.grad = grads.copy(), grads.copy()
        sgd_step({"bn.gamma": decayed_run}, SGDState(), 0.1, 0.9, weight_decay=0.1, decay_mask={"bn.gamma": False})
        sgd_step({"bn.gamma": plain_run}, SGDState(), 0.1, 0.9, weight_decay=0.0)
        assert np.array_equal(decayed_run.data, plain_run.data)

    def test_missing_gradient_counts_as_zero(self):
        p = scalar_param(2.0)
        sgd_step({"p": p}, SGDState(), learning_rate=0.1)
        assert p.data[0] == 2.0


def test_optimizer_state_round_trip():
    p = scalar_param(1.0, 1.0)
    optimizer = SGD({"p": p}, 0.1, 0.9)
    optimizer.step()
    restored = SGD({"p": scalar_param(1.0)}, 0.1, 0.9)
    restored.load_state_dict(optimizer.state_dict())
    np.testing.assert_array_equal(restored.state.velocity["p"], optimizer.state.velocity["p"])


@pytest.mark.parametrize(
    "kwargs",
    [{"learning_rate": 0.0}, {"momentum": 1.0}, {"weight_decay": -0.1}, {"batch_size": 0}, {"epochs": 0}],
)
def test_invalid_train_config(kwargs):
    with pytest.raises(ConfigError):
        TrainConfig(**kwargs)


def test_train_config_defaults():
    config = TrainConfig()
    assert (config.learning_rate, config.momentum, config.weight_decay, config.batch_size) == (1e-3, 0.9, 0.1, 8)
    assert not config.init_from_checkpoint
