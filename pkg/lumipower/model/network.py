__doc__ = """
ResNet-style backbone with two interchangeable heads:

- ``embedding_linear``: global average pooling to an embedding, then a
  bias-free linear map to the relative power.
- ``regression_map``: a 1x1 convolution to one channel, negated so that every
  entry is a (nonpositive) relative-power loss; the prediction is one plus the
  sum of the map.
"""

import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from lumipower.errors import CheckpointError, ConfigError, ShapeError
from lumipower.tensor import Tensor
from lumipower.tensor import functional as F
from lumipower.utility.logging import get_script_logger

from .layers import BasicBlock, Conv2d, ConvBN, Module, ModuleList
from .spec import ModelSpec

MAP_BIAS_INIT = 0.1


@dataclass
class RegressionMap:
    """
    Per-sample loss map (h_map x w_map) in fractions of nominal power.
    Entries are nonpositive unless produced in the "identity" diagnostic mode.
    """

    values: np.ndarray

    @property
    def shape(self):
        return self.values.shape

    @property
    def relative_power(self) -> float:
        return float(1.0 + self.values.sum())


@dataclass
class ForwardOutput:
    y_hat: Tensor
    embedding: Optional[Tensor] = None
    loss_map: Optional[Tensor] = None

    def regression_maps(self) -> List[RegressionMap]:
        if self.loss_map is None:
            return []
        return [RegressionMap(values=self.loss_map.data[i, 0].copy()) for i in range(self.loss_map.shape[0])]


class ResNetBackbone(Module):
    def __init__(self, spec: ModelSpec, rng: np.random.Generator, dtype=None):
        super().__init__()
        widths = spec.stage_widths
        self.stem = ConvBN(rng, spec.in_channels, widths[0], 7, stride=2, padding=3, dtype=dtype)
        self.stages = ModuleList()
        in_channels = widths[0]
        for index, width in enumerate(widths):
            stage = ModuleList()
            for block in range(spec.blocks_per_stage):
                stride = 2 if index > 0 and block == 0 else 1
                stage.append(BasicBlock(rng, in_channels, width, stride, dtype=dtype))
                in_channels = width
            self.stages.append(stage)

    def forward(self, x):
        x = F.max_pool2d(F.relu(self.stem(x)), 2, 2)
        for stage in self.stages:
            for block in stage:
                x = block(x)
        return x


class MapHead(Module):
    """
    1x1 projection divided by the map area of the nominal input. On a nominal
    input the map then sums to what the pooled linear head predicts with the
    same weights, and both heads take the same learning rate.
    """

    def __init__(self, spec: ModelSpec, rng: np.random.Generator, dtype=None):
        super().__init__()
        self.negation = spec.map_negation
        h, w = spec.map_shape(*spec.input_shape[1:])
        self.scale = 1.0 / max(1, h * w)
        self.conv = Conv2d(rng, spec.embedding_dim, 1, 1, bias=spec.map_bias, dtype=dtype)
        # small projection and a positive bias: the untrained map predicts a
        # uniform loss of MAP_BIAS_INIT on nominal inputs, with every entry active
        std = 0.01 / np.sqrt(spec.embedding_dim)
        self.conv.weight.data[...] = rng.normal(0.0, std, size=self.conv.weight.shape)
        if self.conv.bias is not None:
            self.conv.bias.data[...] = MAP_BIAS_INIT

    def forward(self, features):
        f = self.conv(features) * self.scale
        if self.negation == "relu":
            return -F.relu(f)
        if self.negation == "abs":
            return -F.abs(f)
        return f


class PowerRegressionNet(Module):
    """
    Relative-power regression network.

    Parameters
    ----------
    spec : ModelSpec
    seed : int
        Seed of the parameter initialization.
    """

    def __init__(self, spec: ModelSpec, seed: int = 0):
        super().__init__()
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "logger", get_script_logger(os.path.basename(__file__)))
        rng = np.random.default_rng(seed)
        self.backbone = ResNetBackbone(spec, rng)
        if spec.head_kind == "embedding_linear":
            bound = 1.0 / np.sqrt(spec.embedding_dim)
            self.head = Module()
            self.head.weight = Tensor(
                rng.uniform(-bound, bound, size=(1, spec.embedding_dim)), requires_grad=True
            )
        else:
            self.head = MapHead(spec, rng)

    @property
    def dtype(self):
        return self.backbone.stem.conv.weight.dtype

    def check_input(self, image: Tensor):
        stride = self.spec.stride
        if image.ndim != 4 or image.shape[1] != self.spec.in_channels:
            raise ShapeError(
                f"Expected input (N, {self.spec.in_channels}, H, W), got {tuple(image.shape)}"
            )
        _, _, height, width = image.shape
        if height % stride or width % stride:
            raise ShapeError(f"Input {height}x{width} is not divisible by the network stride {stride}")

    def forward(self, image) -> ForwardOutput:
        if not isinstance(image, Tensor):
            image = Tensor(image, dtype=self.dtype)
        self.check_input(image)
        features = self.backbone(image)
        n = features.shape[0]
        if self.spec.head_kind == "embedding_linear":
            embedding = F.global_avg_pool(features)
            return ForwardOutput(y_hat=F.linear(embedding, self.head.weight), embedding=embedding)
        loss_map = self.head(features)
        h, w = loss_map.shape[2:]
        total = loss_map.reshape(n, h * w).sum(axis=1, keepdims=True)
        return ForwardOutput(y_hat=total + 1.0, loss_map=loss_map)

    # parameter bookkeeping ----------------------------------------------
    def decay_mask(self) -> dict:
        """Weight decay applies to conv/linear weights; batch-norm affine terms and biases are exempt."""
        return {name: name.endswith(".weight") for name, _ in self.named_parameters()}

    def state_dict(self) -> dict:
        state = {name: tensor.data for name, tensor in self.named_parameters()}
        state.update(dict(self.named_buffers()))
        return state

    def load_state_dict(self, arrays: dict):
        targets = self.state_dict()
        missing = [name for name in targets if name not in arrays]
        unexpected = [name for name in arrays if name not in targets]
        mismatched = [
            f"{name} {tuple(arrays[name].shape)} != {tuple(target.shape)}"
            for name, target in targets.items()
            if name in arrays and tuple(arrays[name].shape) != tuple(target.shape)
        ]
        if missing or unexpected or mismatched:
            details = []
            if mismatched:
                details.append("shape mismatch: " + ", ".join(mismatched))
            if missing:
                details.append("missing: " + ", ".join(missing))
            if unexpected:
                details.append("unexpected: " + ", ".join(unexpected))
            raise CheckpointError("Checkpoint does not fit the model; " + "; ".join(details))
        for name, target in targets.items():
            target[...] = arrays[name]
        self.logger.debug(f"loaded {len(targets)} tensors")


def forward_embedding(model: PowerRegressionNet, image) -> Tuple[Tensor, Tensor]:
    """Return (y_hat [N,1], f_emb [N,D]) of an embedding/linear model."""
    if model.spec.head_kind != "embedding_linear":
        raise ConfigError("forward_embedding needs head_kind = embedding_linear")
    out = model(image)
    return out.y_hat, out.embedding


def forward_map(model: PowerRegressionNet, image) -> Tuple[Tensor, List[RegressionMap]]:
    """Return (y_hat [N,1], one RegressionMap per sample) of a regression-map model."""
    if model.spec.head_kind != "regression_map":
        raise ConfigError("forward_map needs head_kind = regression_map")
    out = model(image)
    return out.y_hat, out.regression_maps()


def count_parameters(spec: ModelSpec) -> int:
    return int(sum(tensor.size for tensor in PowerRegressionNet(spec).parameters()))
