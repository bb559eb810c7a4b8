"""
Sample-based Wasserstein-1 distances used as fidelity proxies.
"""
import numpy as np
from scipy.stats import wasserstein_distance

from numerics.errors import InputError
from numerics.rng import SeededRng
from numerics.tensor import as_latent

# projections handled per chunk in sliced_w1
PROJECTION_CHUNK = 16


def _samples_1d(values, name: str) -> np.ndarray:
    arr = as_latent(values, name).ravel()
    if arr.size == 0:
        raise InputError(f"{name} is empty")
    return arr


def w1_distance_1d(samples_a, samples_b) -> float:
    """
    W1 between two empirical 1-D distributions.

    Equal sizes use the sorted-sample form mean |a_(i) - b_(i)|; unequal
    sizes fall back to the exact quantile-function distance.
    """
    a = _samples_1d(samples_a, "samples_a")
    b = _samples_1d(samples_b, "samples_b")
    if a.size == b.size:
        return float(np.mean(np.abs(np.sort(a) - np.sort(b))))
    return float(wasserstein_distance(a, b))


def _cloud(values, name: str) -> np.ndarray:
    arr = as_latent(values, name)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty (count, dims) array, got shape {arr.shape}")
    return arr


def random_directions(rng: SeededRng, count: int, dims: int) -> np.ndarray:
    """`count` unit vectors, isotropic in `dims` dimensions."""
    v = rng.normal((count, dims))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sliced_w1(samples_a, samples_b, directions: int, rng: SeededRng) -> float:
    """Mean 1-D W1 over random unit projections; deterministic for a given rng."""
    a = _cloud(samples_a, "samples_a")
    b = _cloud(samples_b, "samples_b")
    if a.shape[1] != b.shape[1]:
        raise InputError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if directions < 1:
        raise InputError(f"need at least one direction, got {directions}")

    dirs = random_directions(rng, directions, a.shape[1])
    total = 0.0
    for start in range(0, directions, PROJECTION_CHUNK):
        chunk = dirs[start:start + PROJECTION_CHUNK]
        pa = np.sort(a @ chunk.T, axis=0)
        pb = np.sort(b @ chunk.T, axis=0)
        if len(a) == len(b):
            total += float(np.sum(np.mean(np.abs(pa - pb), axis=0)))
        else:
            total += sum(wasserstein_distance(pa[:, j], pb[:, j]) for j in range(len(chunk)))
    return total / directions
