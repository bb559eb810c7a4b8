"""
Latent tensor helpers.

A LatentTensor is a plain float64 numpy array; these helpers enforce the
finiteness and shape contracts at module boundaries.
"""
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError

LatentTensor = NDArray[np.float64]


def as_latent(x: ArrayLike, name: str = "tensor") -> LatentTensor:
    """Convert to a float64 array and reject NaN/Inf."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "tensors") -> None:
    if a.shape != b.shape:
        raise InputError(f"{what} shape mismatch: {a.shape} vs {b.shape}")


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InputError(f"{name} must be positive, got {value}")
    return value


def numel(shape: Sequence[int]) -> int:
    return int(np.prod(shape, dtype=np.int64))
