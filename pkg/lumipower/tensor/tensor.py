__doc__ = """
Reverse-mode automatic differentiation.

A `Tensor` wraps a numpy array. Every differentiable operation is a `Function`
subclass; applying it records a node on the result so that `backward()` can
replay the graph in reverse topological order (see `ComputationTape`).
"""

import contextlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from lumipower.errors import ShapeError

_DEFAULT_DTYPE = np.float32
_GRAD_ENABLED = True


def get_default_dtype():
    return _DEFAULT_DTYPE


def set_default_dtype(dtype):
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"Unsupported storage precision: {dtype}")
    _DEFAULT_DTYPE = dtype


@contextlib.contextmanager
def precision(dtype):
    """
    Temporarily switch the storage precision of newly created tensors.
    Gradient checks run under `precision(np.float64)`.
    """
    previous = _DEFAULT_DTYPE
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording (inference)."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """
    n-dimensional float array with optional gradient tracking.

    Attributes
    ----------
    data : np.ndarray
        Values (float32 or float64). Image batches use (N, C, H, W) order.
    grad : np.ndarray | None
        Accumulated dLoss/dTensor, same shape as `data`.
    requires_grad : bool
    """

    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        dtype = dtype if dtype is not None else get_default_dtype()
        self.data = np.ascontiguousarray(data, dtype=dtype)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._ctx = None

    # properties ---------------------------------------------------------
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def is_leaf(self):
        return self._ctx is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False, dtype=self.dtype)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype.name}, requires_grad={self.requires_grad})"

    def __len__(self):
        return self.shape[0]

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        from . import functional as F

        return F.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from . import functional as F

        return F.add(self, F.scale(_as_tensor(other, self.dtype), -1.0))

    def __rsub__(self, other):
        from . import functional as F

        return F.add(F.scale(self, -1.0), other)

    def __mul__(self, other):
        from . import functional as F

        if np.isscalar(other):
            return F.scale(self, float(other))
        return F.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from . import functional as F

        if not np.isscalar(other):
            raise TypeError("Only division by a scalar is supported")
        return F.scale(self, 1.0 / float(other))

    def __neg__(self):
        from . import functional as F

        return F.scale(self, -1.0)

    def sum(self, axis=None, keepdims=False):
        from . import functional as F

        return F.sum(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        from . import functional as F

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return F.reshape(self, shape)

    def relu(self):
        from . import functional as F

        return F.relu(self)

    def abs(self):
        from . import functional as F

        return F.abs(self)

    # autodiff -------------------------------------------------------------
    def backward(self, grad=None):
        """
        Accumulate dSelf/dT into `T.grad` for every tensor T on the recorded
        path that requires gradients. Repeated calls accumulate.
        """
        if grad is None:
            if self.data.size != 1:
                raise ShapeError(
                    f"backward() without an explicit gradient needs a scalar, got shape {self.shape}"
                )
            grad = np.ones_like(self.data)
        else:
            grad = np.asarray(grad, dtype=self.dtype)
            if grad.shape != self.shape:
                raise ShapeError(f"Gradient shape {grad.shape} != tensor shape {self.shape}")

        tape = ComputationTape.from_output(self)
        pending = {id(self): grad}
        for tensor in reversed(tape.tensors):
            g = pending.pop(id(tensor), None)
            if g is None:
                continue
            if tensor.requires_grad:
                tensor.grad = g.copy() if tensor.grad is None else tensor.grad + g
            ctx = tensor._ctx
            if ctx is None:
                continue
            input_grads = ctx.backward(g)
            for parent, parent_grad in zip(ctx.parents, input_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad


def _as_tensor(value, dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False, dtype=dtype)


class Function:
    """
    A differentiable operation. Subclasses implement `forward` on numpy arrays
    (stashing what `backward` needs on `self`) and `backward`, which returns
    one gradient (or None) per tensor input.
    """

    def __init__(self, *parents: Tensor):
        self.parents = parents
        self.needs_input_grad = tuple(p.requires_grad for p in parents)

    def forward(self, *arrays, **kwargs) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> Sequence[np.ndarray | None]:
        raise NotImplementedError

    @classmethod
    def apply(cls, *inputs, **kwargs) -> Tensor:
        tensors = tuple(_as_tensor(t) for t in inputs)
        ctx = cls(*tensors)
        out_data = ctx.forward(*(t.data for t in tensors), **kwargs)
        requires_grad = _GRAD_ENABLED and any(ctx.needs_input_grad)
        out = Tensor(out_data, requires_grad=requires_grad, dtype=out_data.dtype)
        if requires_grad:
            out._ctx = ctx
        return out

    @property
    def name(self):
        return type(self).__name__


@dataclass
class ComputationTape:
    """
    Ordered record of the executed operations leading to an output.

    `tensors` is in topological order: operands precede the results computed
    from them. `operations` lists the recorded `Function` nodes in the same
    order, each exactly once.
    """

    tensors: list = field(default_factory=list)

    @property
    def operations(self) -> list:
        return [t._ctx for t in self.tensors if t._ctx is not None]

    @classmethod
    def from_output(cls, output: Tensor) -> "ComputationTape":
        order = []
        visited = set()
        # iterative post-order DFS; deep residual graphs overflow recursion
        stack = [(output, False)]
        while stack:
            tensor, expanded = stack.pop()
            if expanded:
                order.append(tensor)
                continue
            if id(tensor) in visited:
                continue
            visited.add(id(tensor))
            stack.append((tensor, True))
            if tensor._ctx is not None:
                for parent in reversed(tensor._ctx.parents):
                    if id(parent) not in visited:
                        stack.append((parent, False))
        return cls(tensors=order)

    def __len__(self):
        return len(self.operations)
