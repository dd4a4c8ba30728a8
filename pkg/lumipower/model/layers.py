__doc__ = """
Parameter containers for the residual backbone.

Tensors with `requires_grad` and child modules assigned as attributes are
registered automatically, in assignment order. Parameter names are dotted
attribute paths (e.g. `stages.1.0.conv1.weight`); checkpoints use them as keys.
"""

from typing import Iterator, Tuple

import numpy as np

from lumipower.tensor import BatchNormState, Tensor
from lumipower.tensor import functional as F


class Module:
    def __init__(self):
        object.__setattr__(self, "_parameters", {})
        object.__setattr__(self, "_modules", {})
        object.__setattr__(self, "training", True)

    def __setattr__(self, name, value):
        if isinstance(value, Module):
            self._modules[name] = value
        elif isinstance(value, Tensor) and value.requires_grad:
            self._parameters[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self._parameters.items():
            yield prefix + name, tensor
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix + name + ".")

    def named_buffers(self, prefix: str = "") -> Iterator[Tuple[str, np.ndarray]]:
        """Non-trainable state (batch-norm running statistics)."""
        for name, module in self._modules.items():
            yield from module.named_buffers(prefix + name + ".")

    def parameters(self):
        return [tensor for _, tensor in self.named_parameters()]

    def train(self, mode: bool = True):
        object.__setattr__(self, "training", mode)
        for module in self._modules.values():
            module.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for tensor in self.parameters():
            tensor.zero_grad()


class ModuleList(Module):
    def __init__(self, modules=()):
        super().__init__()
        for module in modules:
            self.append(module)

    def append(self, module: Module):
        setattr(self, str(len(self._modules)), module)

    def __iter__(self):
        return iter(self._modules.values())

    def __len__(self):
        return len(self._modules)

    def __getitem__(self, index):
        return list(self._modules.values())[index]


def kaiming_normal(rng: np.random.Generator, shape, dtype) -> Tensor:
    # fan-out mode, as torchvision initializes ResNet convolutions
    fan_out = shape[0] * int(np.prod(shape[2:]))
    data = rng.normal(0.0, np.sqrt(2.0 / fan_out), size=shape)
    return Tensor(data, requires_grad=True, dtype=dtype)


class Conv2d(Module):
    def __init__(self, rng, in_channels, out_channels, kernel, stride=1, padding=0, bias=False, dtype=None):
        super().__init__()
        self.stride, self.padding = stride, padding
        self.weight = kaiming_normal(rng, (out_channels, in_channels, kernel, kernel), dtype)
        self.bias = Tensor(np.zeros(out_channels), requires_grad=True, dtype=dtype) if bias else None

    def forward(self, x):
        return F.conv2d(x, self.weight, stride=self.stride, padding=self.padding, bias=self.bias)


class BatchNorm2d(Module):
    def __init__(self, channels, dtype=None):
        super().__init__()
        self.gamma = Tensor(np.ones(channels), requires_grad=True, dtype=dtype)
        self.beta = Tensor(np.zeros(channels), requires_grad=True, dtype=dtype)
        self.state = BatchNormState(channels, dtype=self.gamma.dtype)

    def named_buffers(self, prefix: str = ""):
        yield prefix + "running_mean", self.state.running_mean
        yield prefix + "running_var", self.state.running_var

    def forward(self, x):
        return F.batchnorm2d(x, self.gamma, self.beta, self.state, self.training)


class ConvBN(Module):
    def __init__(self, rng, in_channels, out_channels, kernel, stride=1, padding=0, dtype=None):
        super().__init__()
        self.conv = Conv2d(rng, in_channels, out_channels, kernel, stride, padding, dtype=dtype)
        self.bn = BatchNorm2d(out_channels, dtype=dtype)

    def forward(self, x):
        return self.bn(self.conv(x))


class BasicBlock(Module):
    """Two 3x3 conv-BN pairs with an identity (or 1x1 projection) shortcut."""

    def __init__(self, rng, in_channels, out_channels, stride=1, dtype=None):
        super().__init__()
        self.conv1 = ConvBN(rng, in_channels, out_channels, 3, stride, 1, dtype=dtype)
        self.conv2 = ConvBN(rng, out_channels, out_channels, 3, 1, 1, dtype=dtype)
        if stride != 1 or in_channels != out_channels:
            self.downsample = ConvBN(rng, in_channels, out_channels, 1, stride, 0, dtype=dtype)
        else:
            self.downsample = None

    def forward(self, x):
        out = F.relu(self.conv1(x))
        out = self.conv2(out)
        shortcut = x if self.downsample is None else self.downsample(x)
        return F.relu(out + shortcut)
