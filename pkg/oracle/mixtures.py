"""
Analytic source distributions with known posteriors under box corruption.

Samples and atoms are always laid out as (count, dims); a 1-D mixture has
dims = 1.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from numerics.errors import InputError
from numerics.rng import SeededRng


def _as_rows(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InputError(f"{name} must be a non-empty list of points")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def _normalized(weights, count: int) -> np.ndarray:
    if weights is None:
        return np.full(count, 1.0 / count)
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.shape != (count,):
        raise InputError(f"expected {count} weights, got {w.shape}")
    if np.any(~np.isfinite(w)) or np.any(w <= 0.0):
        raise InputError("mixture weights must be positive")
    return w / w.sum()


@dataclass
class PointMixture:
    """Discrete distribution over distinct atoms."""
    atoms: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        self.atoms = _as_rows(self.atoms, "atoms")
        self.weights = _normalized(self.weights, len(self.atoms))
        if len(np.unique(self.atoms, axis=0)) != len(self.atoms):
            raise InputError("mixture atoms must be distinct")

    @classmethod
    def two_point(cls, a: float = -1.0, b: float = 1.0, weights: Sequence[float] = None) -> "PointMixture":
        return cls([a, b], weights)

    @property
    def dims(self) -> int:
        return self.atoms.shape[1]

    def sample(self, rng: SeededRng, count: int) -> np.ndarray:
        return self.atoms[rng.choice(len(self.atoms), size=count, p=self.weights)]


@dataclass
class GaussianMixture:
    """Mixture of axis-aligned Gaussians."""
    means: np.ndarray
    variances: np.ndarray
    weights: np.ndarray = None

    def __post_init__(self):
        self.means = _as_rows(self.means, "means")
        self.variances = _as_rows(self.variances, "variances")
        if self.variances.shape != self.means.shape:
            raise InputError(f"variances {self.variances.shape} must match means {self.means.shape}")
        if np.any(self.variances <= 0.0):
            raise InputError("component variances must be positive")
        self.weights = _normalized(self.weights, len(self.means))

    @classmethod
    def four_component_2d(cls, offset: float = 1.5, std: float = 0.3) -> "GaussianMixture":
        """Equal-weight components on the corners of a square."""
        corners = np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]], dtype=np.float64) * offset
        return cls(corners, np.full_like(corners, std * std))

    @property
    def dims(self) -> int:
        return self.means.shape[1]

    @property
    def stds(self) -> np.ndarray:
        return np.sqrt(self.variances)

    def sample(self, rng: SeededRng, count: int) -> np.ndarray:
        component = rng.choice(len(self.means), size=count, p=self.weights)
        return self.means[component] + self.stds[component] * rng.normal((count, self.dims))
