from . import functional
from .functional import BatchNormState
from .kernels import configure_threads, configured_threads
from .tensor import (
    ComputationTape,
    Function,
    Tensor,
    get_default_dtype,
    is_grad_enabled,
    no_grad,
    precision,
    set_default_dtype,
)
