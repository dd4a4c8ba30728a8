__doc__ = """
Numba kernels for the scatter-style backward passes.

Each kernel parallelizes over (sample, channel) planes; a plane is written by
exactly one thread in a fixed loop order, so results do not depend on the
thread count. `LUMIPOWER_THREADS` caps both numba and the BLAS pool behind the
dense products; `LUMIPOWER_THREADS=1` runs the sequential reference mode.
"""

import os

import numba
import numpy as np
import psutil
from numba import njit, prange
from threadpoolctl import threadpool_limits

from lumipower.errors import ConfigError

THREADS_ENV = "LUMIPOWER_THREADS"


def configured_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value is None:
        count = psutil.cpu_count(logical=False) or 1
    else:
        try:
            count = int(value)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}")
        if count < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1, got {count}")
    return min(count, numba.config.NUMBA_NUM_THREADS)


def configure_threads() -> int:
    """Apply the thread cap from the environment; return the count in use."""
    count = configured_threads()
    numba.set_num_threads(count)
    threadpool_limits(limits=count, user_api="blas")
    return count


@njit(cache=True, parallel=True)
def col2im(columns, out_shape, kh, kw, stride):
    """
    Scatter-add window gradients back onto the (padded) input plane.

    columns : (N, Ho, Wo, C, kh, kw)
    out_shape : (N, C, Hp, Wp)
    """
    n_batch, n_channel = out_shape[0], out_shape[1]
    out = np.zeros(out_shape, dtype=columns.dtype)
    ho, wo = columns.shape[1], columns.shape[2]
    for nc in prange(n_batch * n_channel):
        n = nc // n_channel
        c = nc % n_channel
        for i in range(ho):
            for j in range(wo):
                for a in range(kh):
                    for b in range(kw):
                        out[n, c, i * stride + a, j * stride + b] += columns[
                            n, i, j, c, a, b
                        ]
    return out


@njit(cache=True, parallel=True)
def max_pool_backward(grad, argmax, out_shape, kernel, stride):
    """
    Route each pooled gradient to the arg-max position of its window.

    grad, argmax : (N, C, Ho, Wo); argmax indexes the flattened window.
    """
    n_batch, n_channel = out_shape[0], out_shape[1]
    out = np.zeros(out_shape, dtype=grad.dtype)
    ho, wo = grad.shape[2], grad.shape[3]
    for nc in prange(n_batch * n_channel):
        n = nc // n_channel
        c = nc % n_channel
        for i in range(ho):
            for j in range(wo):
                k = argmax[n, c, i, j]
                out[n, c, i * stride + k // kernel, j * stride + k % kernel] += grad[
                    n, c, i, j
                ]
    return out
