import numpy as np
import pytest

from lumipower.errors import CheckpointError, ConfigError, ShapeError
from lumipower.model import ModelSpec, PowerRegressionNet, count_parameters, forward_embedding, forward_map
from lumipower.model.network import MAP_BIAS_INIT
from lumipower.tensor import Tensor, no_grad, precision

FULL_BACKBONE_PARAMETERS = (
    (64 * 49 + 2 * 64)  # stem
    + (4 * 64 * 64 * 9 + 4 * 2 * 64)  # stage 1
    + (128 * 64 * 9 + 3 * 128 * 128 * 9 + 128 * 64 + 5 * 2 * 128)  # stage 2
    + (256 * 128 * 9 + 3 * 256 * 256 * 9 + 256 * 128 + 5 * 2 * 256)  # stage 3
    + (512 * 256 * 9 + 3 * 512 * 512 * 9 + 512 * 256 + 5 * 2 * 512)  # stage 4
)


def make_model(head_kind="regression_map", seed=0, **kwargs):
    with precision(np.float64):
        return PowerRegressionNet(ModelSpec.preset("mini", head_kind=head_kind, **kwargs), seed=seed)


def random_image(rng, n=2, height=64, width=64):
    return Tensor(rng.normal(size=(n, 1, height, width)), dtype=np.float64)


class TestEmbeddingHead:
    def test_zero_weights_predict_zero(self):
        model = make_model("embedding_linear")
        model.head.weight.data[...] = 0.0
        y_hat, _ = forward_embedding(model, random_image(np.random.default_rng(0)))
        np.testing.assert_array_equal(y_hat.data, np.zeros((2, 1)))

    def test_embedding_dimension_is_last_stage_width(self):
        model = make_model("embedding_linear")
        y_hat, embedding = forward_embedding(model, random_image(np.random.default_rng(1)))
        assert embedding.shape == (2, 64)
        assert y_hat.shape == (2, 1)

    def test_prediction_is_dot_product_of_embedding(self):
        model = make_model("embedding_linear")
        y_hat, embedding = forward_embedding(model, random_image(np.random.default_rng(2)))
        np.testing.assert_array_equal(y_hat.data, embedding.data @ model.head.weight.data.T)

    def test_forward_map_rejects_embedding_model(self):
        with pytest.raises(ConfigError):
            forward_map(make_model("embedding_linear"), random_image(np.random.default_rng(0)))


class TestMapHead:
    def test_zero_projection_predicts_no_loss(self):
        model = make_model()
        model.head.conv.weight.data[...] = 0.0
        model.head.conv.bias.data[...] = 0.0
        y_hat, maps = forward_map(model, random_image(np.random.default_rng(3)))
        np.testing.assert_array_equal(y_hat.data, np.ones((2, 1)))
        for regression_map in maps:
            assert not np.any(regression_map.values)

    def test_map_shape_follows_stride(self):
        model = make_model()
        _, maps = forward_map(model, random_image(np.random.default_rng(4), n=1, height=192, width=320))
        assert maps[0].shape == (6, 10)

    @pytest.mark.parametrize("negation", ["relu", "abs"])
    def test_identity_nonpositivity_and_upper_bound(self, negation):
        rng = np.random.default_rng(5)
        model = make_model(map_negation=negation).eval()
        with no_grad():
            for _ in range(100):
                model.head.conv.weight.data[...] = rng.normal(size=model.head.conv.weight.shape)
                model.head.conv.bias.data[...] = rng.normal(size=1)
                y_hat, maps = forward_map(model, random_image(rng))
                for i, regression_map in enumerate(maps):
                    assert y_hat.data[i, 0] == 1.0 + regression_map.values.sum()
                    assert np.all(regression_map.values <= 0)
                    assert y_hat.data[i, 0] <= 1.0

    def test_matches_average_pool_linear_head_on_shared_weights(self):
        embedding_model = make_model("embedding_linear", seed=9).eval()
        map_model = make_model(map_negation="identity", map_bias=False, seed=9).eval()
        for (name, a), (_, b) in zip(
            embedding_model.backbone.named_parameters(), map_model.backbone.named_parameters()
        ):
            np.testing.assert_array_equal(a.data, b.data, err_msg=name)
        map_model.head.conv.weight.data[...] = embedding_model.head.weight.data.reshape(1, -1, 1, 1)

        image = random_image(np.random.default_rng(6), height=192, width=320)
        with no_grad():
            expected, _ = forward_embedding(embedding_model, image)
            _, maps = forward_map(map_model, image)
        for i, regression_map in enumerate(maps):
            assert regression_map.shape == (6, 10)
            np.testing.assert_allclose(regression_map.values.sum(), expected.data[i, 0], rtol=1e-10)

    def test_untrained_map_predicts_uniform_bias_loss(self):
        model = make_model(seed=4)
        with no_grad():
            y_hat, maps = forward_map(model, random_image(np.random.default_rng(7), n=2, height=192, width=320))
        for i, regression_map in enumerate(maps):
            assert np.all(regression_map.values < 0)
            assert y_hat.data[i, 0] == pytest.approx(1.0 - MAP_BIAS_INIT, abs=0.03)


class TestInputValidation:
    def test_wrong_channel_count(self):
        with pytest.raises(ShapeError):
            make_model()(Tensor(np.zeros((1, 3, 64, 64))))

    def test_size_not_divisible_by_stride(self):
        with pytest.raises(ShapeError):
            make_model()(Tensor(np.zeros((1, 1, 60, 64))))


class TestParameterCount:
    def test_deterministic(self):
        spec = ModelSpec.preset("mini")
        assert count_parameters(spec) == count_parameters(spec)

    def test_full_backbone_matches_layer_arithmetic(self):
        model = PowerRegressionNet(ModelSpec.preset("full", head_kind="embedding_linear"))
        backbone = sum(t.size for t in model.backbone.parameters())
        assert backbone == FULL_BACKBONE_PARAMETERS == 11_170_240

    @pytest.mark.parametrize(
        "head_kind, map_bias, extra",
        [("embedding_linear", True, 64), ("regression_map", True, 65), ("regression_map", False, 64)],
    )
    def test_head_parameters(self, head_kind, map_bias, extra):
        spec = ModelSpec.preset("mini", head_kind=head_kind, map_bias=map_bias)
        backbone = sum(t.size for t in PowerRegressionNet(spec).backbone.parameters())
        assert count_parameters(spec) - backbone == extra


class TestStateDict:
    def test_names_depend_only_on_spec(self):
        a, b = make_model(seed=1), make_model(seed=2)
        assert list(a.state_dict()) == list(b.state_dict())

    def test_decay_mask_exempts_batchnorm_and_bias(self):
        mask = make_model().decay_mask()
        assert mask["backbone.stem.conv.weight"]
        assert not mask["backbone.stem.bn.gamma"]
        assert not mask["backbone.stem.bn.beta"]
        assert not mask["head.conv.bias"]
        assert mask["head.conv.weight"]

    def test_load_rejects_other_preset(self):
        full = PowerRegressionNet(ModelSpec.preset("full"))
        with pytest.raises(CheckpointError, match="backbone.stem.conv.weight"):
            make_model().load_state_dict(full.state_dict())

    def test_load_copies_values(self):
        source, target = make_model(seed=3), make_model(seed=4)
        target.load_state_dict(source.state_dict())
        for name, value in source.state_dict().items():
            np.testing.assert_array_equal(target.state_dict()[name], value)
