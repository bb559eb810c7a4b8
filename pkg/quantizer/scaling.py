"""
Quantization scaling and its additive-uniform-noise simulation.

A single scale q parameterizes the corruption: hard rounding on the lattice
qZ for coding, y + U[-0.5, 0.5) * q when the rate is simulated.
Rounding is half away from zero on both encoder and decoder.
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np

from numerics.errors import InputError, SymbolRangeError
from numerics.rng import SeededRng
from numerics.tensor import LatentTensor, as_latent

logger = logging.getLogger(__name__)

Scale = Union[float, np.ndarray]


def _check_scale(q: Scale, allow_zero: bool = False) -> np.ndarray:
    q_arr = np.asarray(q, dtype=np.float64)
    bad = (q_arr < 0.0) if allow_zero else (q_arr <= 0.0)
    if np.any(~np.isfinite(q_arr)) or np.any(bad):
        raise InputError(f"quantization scale must be {'non-negative' if allow_zero else 'positive'}, got {q}")
    return q_arr


def round_half_away(v: np.ndarray) -> np.ndarray:
    """Nearest integer, ties away from zero (exact: v - trunc(v) is representable)."""
    whole = np.trunc(v)
    frac = v - whole
    return whole + np.sign(v) * (np.abs(frac) >= 0.5)


def quantize_scaled(y: LatentTensor, q: Scale) -> LatentTensor:
    """round(y / q) * q elementwise."""
    q_arr = _check_scale(q)
    y = as_latent(y, "latent")
    return round_half_away(y / q_arr) * q_arr


def symbolize(
    y: LatentTensor,
    q: Scale,
    bounds: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    clamp: bool = False,
) -> np.ndarray:
    """
    Integer symbols round(y / q).

    bounds = (k_lo, k_hi), broadcast over the last axis, checks the alphabet;
    out-of-range symbols raise unless clamp is set, in which case they are
    pinned to the edge symbols and reported in the log.
    """
    q_arr = _check_scale(q)
    y = as_latent(y, "latent")
    k = round_half_away(y / q_arr).astype(np.int64)
    if bounds is None:
        return k

    lo, hi = (np.asarray(b, dtype=np.int64) for b in bounds)
    outside = (k < lo) | (k > hi)
    if np.any(outside):
        count = int(outside.sum())
        if not clamp:
            first = int(np.flatnonzero(outside.ravel())[0])
            raise SymbolRangeError(f"{count} symbols outside the alphabet (first at flat index {first})", first)
        logger.warning(f"clamped {count} out-of-alphabet symbols to edge symbols")
        k = np.clip(k, lo, hi)
    return k


def desymbolize(k: np.ndarray, q: Scale) -> LatentTensor:
    """k * q."""
    q_arr = _check_scale(q)
    return np.asarray(k, dtype=np.float64) * q_arr


def simulate_quantize(y: LatentTensor, q: Scale, rng: SeededRng) -> LatentTensor:
    """y + u * q with u i.i.d. uniform on [-0.5, 0.5); q = 0 returns y unchanged."""
    q_arr = _check_scale(q, allow_zero=True)
    y = as_latent(y, "latent")
    u = rng.uniform(-0.5, 0.5, size=y.shape)
    return y + u * q_arr
