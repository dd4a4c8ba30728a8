from lumipower.errors import ShapeError
from lumipower.tensor import Tensor


def mse_loss(y_hat: Tensor, y) -> Tensor:
    """Mean squared error (1/N) * sum((y_hat - y)^2) over a batch of N predictions."""
    if not isinstance(y, Tensor):
        y = Tensor(y, dtype=y_hat.dtype)
    if y_hat.shape != y.shape:
        raise ShapeError(f"Prediction shape {y_hat.shape} != target shape {y.shape}")
    if y_hat.size == 0:
        raise ShapeError("mse_loss needs at least one sample")
    diff = y_hat - y
    return (diff * diff).sum() * (1.0 / y_hat.size)
