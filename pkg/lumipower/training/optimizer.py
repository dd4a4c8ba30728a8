__doc__ = """
Stochastic gradient descent with momentum and decoupled weight decay:

    v <- m * v + g
    p <- p - lr * (v + lambda * p)      (decayed parameters)
    p <- p - lr * v                      (exempt parameters)
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from lumipower.tensor import Tensor


@dataclass
class SGDState:
    """Momentum buffers keyed by parameter name."""

    velocity: Dict[str, np.ndarray] = field(default_factory=dict)
    steps: int = 0


def sgd_step(
    params: Mapping[str, Tensor],
    state: SGDState,
    learning_rate: float,
    momentum: float = 0.0,
    weight_decay: float = 0.0,
    decay_mask: Optional[Mapping[str, bool]] = None,
):
    """
    Update `params` in place from their accumulated `.grad`.
    A parameter without gradient is treated as having a zero gradient.
    """
    for name, param in params.items():
        dtype = param.data.dtype.type
        grad = param.grad if param.grad is not None else np.zeros_like(param.data)
        velocity = state.velocity.get(name)
        if velocity is None:
            velocity = np.zeros_like(param.data)
        velocity = dtype(momentum) * velocity + grad
        state.velocity[name] = velocity
        decayed = weight_decay and (decay_mask is None or decay_mask.get(name, False))
        if decayed:
            param.data -= dtype(learning_rate) * (velocity + dtype(weight_decay) * param.data)
        else:
            param.data -= dtype(learning_rate) * velocity
    state.steps += 1


class SGD:
    def __init__(self, named_params, learning_rate, momentum=0.0, weight_decay=0.0, decay_mask=None):
        self.params = dict(named_params)
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.decay_mask = decay_mask
        self.state = SGDState()

    def step(self):
        sgd_step(
            self.params,
            self.state,
            self.learning_rate,
            self.momentum,
            self.weight_decay,
            self.decay_mask,
        )

    def zero_grad(self):
        for param in self.params.values():
            param.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {f"velocity.{name}": value for name, value in self.state.velocity.items()}

    def load_state_dict(self, arrays: Mapping[str, np.ndarray]):
        self.state.velocity = {
            name[len("velocity."):]: np.array(value, dtype=self.params[name[len("velocity."):]].dtype)
            for name, value in arrays.items()
            if name.startswith("velocity.") and name[len("velocity."):] in self.params
        }
