"""
Per-channel logistic entropy model (the rate-variable entropy model).

Channel c is a logistic(mu_c, s_c) density; a symbol k at scale q carries the
mass of the bin [(k - 0.5) q, (k + 0.5) q]. The alphabet at (model, q) is the
smallest symbol range holding >= 1 - 2**-20 of the mass, with both tails
folded into the edge symbols, so encoder and decoder derive identical tables
from (model id, q, channel) alone.
"""
import hashlib
import math
import struct
from dataclasses import dataclass, field
from typing import Dict, List, Protocol, Tuple

import numpy as np
from scipy.special import expit, logit

from numerics.errors import EntropyModelError, InputError, SymbolRangeError, UnsupportedRateError
from numerics.rng import SeededRng
from numerics.tensor import LatentTensor, as_latent
from quantizer.scaling import quantize_scaled, symbolize

from .tables import MAX_ALPHABET, FrequencyTable

DEFAULT_Q_MIN = 0.05
DEFAULT_Q_MAX = 2.0
TAIL_MASS = 2.0 ** -20
SCALE_FLOOR = 1e-6


def interval_mass(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """F(hi) - F(lo) for the standard logistic, evaluated on the far side of the
    median so that right-tail bins do not cancel to zero."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    upper = (np.nan_to_num(lo, neginf=-1e300) + np.nan_to_num(hi, posinf=1e300)) > 0
    return np.where(upper, expit(-lo) - expit(-hi), expit(hi) - expit(lo))


class SymbolModel(Protocol):
    def log2_prob(self, symbols: np.ndarray, q: float) -> np.ndarray:
        ...


@dataclass
class UniformSymbolModel:
    """Flat distribution over [k_lo, k_hi]; a reference model for rate checks."""
    k_lo: int
    k_hi: int

    def log2_prob(self, symbols: np.ndarray, q: float) -> np.ndarray:
        symbols = np.asarray(symbols)
        if np.any((symbols < self.k_lo) | (symbols > self.k_hi)):
            raise EntropyModelError("symbol outside the uniform alphabet")
        return np.full(symbols.shape, -math.log2(self.k_hi - self.k_lo + 1))


@dataclass
class ChannelEntropyModel:
    """Logistic location / log-scale per channel with a supported q range."""
    mu: np.ndarray
    log_scale: np.ndarray
    q_min: float = DEFAULT_Q_MIN
    q_max: float = DEFAULT_Q_MAX
    _tables: Dict[float, List[FrequencyTable]] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64).ravel()
        self.log_scale = np.asarray(self.log_scale, dtype=np.float64).ravel()
        if self.mu.shape != self.log_scale.shape or self.mu.size == 0:
            raise InputError("mu and log_scale must be non-empty vectors of equal length")
        if not (np.all(np.isfinite(self.mu)) and np.all(np.isfinite(self.log_scale))):
            raise InputError("entropy model parameters must be finite")
        if not 0.0 < self.q_min < self.q_max:
            raise InputError(f"supported range must satisfy 0 < q_min < q_max, got [{self.q_min}, {self.q_max}]")

    @property
    def channels(self) -> int:
        return len(self.mu)

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    def body_bytes(self) -> bytes:
        """Canonical parameter bytes; the model id hashes exactly these."""
        return (
            struct.pack("<I", self.channels)
            + struct.pack("<dd", self.q_min, self.q_max)
            + np.column_stack([self.mu, self.log_scale]).astype("<f8").tobytes()
        )

    @property
    def model_id(self) -> int:
        return int.from_bytes(hashlib.sha256(self.body_bytes()).digest()[:8], "little")

    def supports(self, q: float) -> bool:
        return self.q_min <= q <= self.q_max

    def check_rate(self, q: float) -> float:
        q = float(q)
        if not self.supports(q):
            raise UnsupportedRateError(f"q={q} outside supported range [{self.q_min}, {self.q_max}]")
        return q

    def alphabet(self, q: float) -> Tuple[np.ndarray, np.ndarray]:
        """Per-channel (k_lo, k_hi): tails beyond each edge hold <= 2**-21."""
        s = self.scale
        x_lo = self.mu + s * logit(TAIL_MASS / 2)
        x_hi = self.mu + s * logit(1.0 - TAIL_MASS / 2)
        k_lo = np.floor(x_lo / q + 0.5).astype(np.int64)
        k_hi = np.ceil(x_hi / q - 0.5).astype(np.int64)
        return k_lo, np.maximum(k_hi, k_lo)

    def _bin_mass(self, channel, k: np.ndarray, q: float, k_lo, k_hi) -> np.ndarray:
        s = self.scale[channel]
        mu = self.mu[channel]
        lo = np.where(k <= k_lo, -np.inf, ((k - 0.5) * q - mu) / s)
        hi = np.where(k >= k_hi, np.inf, ((k + 0.5) * q - mu) / s)
        return interval_mass(lo, hi)

    def channel_pmf(self, channel: int, q: float) -> Tuple[int, np.ndarray]:
        """(k_lo, probabilities over the folded alphabet) for one channel."""
        k_lo, k_hi = self.alphabet(q)
        lo, hi = int(k_lo[channel]), int(k_hi[channel])
        if hi - lo + 1 > MAX_ALPHABET:
            raise EntropyModelError(f"channel {channel} needs {hi - lo + 1} symbols at q={q}")
        ks = np.arange(lo, hi + 1)
        return lo, self._bin_mass(channel, ks, q, lo, hi)

    def log2_prob(self, symbols: np.ndarray, q: float) -> np.ndarray:
        """log2 P(k) for symbols laid out with channels on the last axis."""
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.size == 0:
            return np.zeros(symbols.shape)
        if symbols.shape[-1] != self.channels:
            raise InputError(f"last axis has {symbols.shape[-1]} channels, model has {self.channels}")
        k_lo, k_hi = self.alphabet(q)
        channel = np.arange(self.channels)
        mass = self._bin_mass(channel, symbols, q, k_lo, k_hi)
        if np.any(mass <= 0.0):
            raise EntropyModelError("symbol with zero probability under the model")
        return np.log2(mass)

    def frequency_tables(self, q: float) -> List[FrequencyTable]:
        """One table per channel; identical on encoder and decoder for equal q bits."""
        q = self.check_rate(q)
        if q not in self._tables:
            self._tables[q] = [FrequencyTable.from_probs(*self.channel_pmf(c, q)) for c in range(self.channels)]
        return self._tables[q]

    def entropy_bits(self, q: float) -> np.ndarray:
        """Per-channel entropy of the folded discrete distribution, in bits."""
        out = np.empty(self.channels)
        for c in range(self.channels):
            _, p = self.channel_pmf(c, q)
            p = p[p > 0]
            out[c] = -np.sum(p * np.log2(p))
        return out

    def moments(self, channel: int, q: float) -> Tuple[float, float]:
        """Mean and standard deviation of k * q under the folded pmf."""
        k_lo, p = self.channel_pmf(channel, q)
        values = (k_lo + np.arange(len(p))) * q
        mean = float(np.sum(p * values))
        var = float(np.sum(p * (values - mean) ** 2))
        return mean, math.sqrt(max(var, 0.0))


def symbol_prob(model: ChannelEntropyModel, channel: int, k: int, q: float) -> float:
    """
    P(k) for one channel at scale q, tails folded into the edge symbols.

    Raises SymbolRangeError for k outside the channel's alphabet at q.
    """
    q = model.check_rate(q)
    k_lo, k_hi = model.alphabet(q)
    lo, hi = int(k_lo[channel]), int(k_hi[channel])
    if not lo <= k <= hi:
        raise SymbolRangeError(f"symbol {k} outside alphabet [{lo}, {hi}] of channel {channel} at q={q}")
    return float(model._bin_mass(channel, np.asarray(k), q, lo, hi))


def rate_bits(model: SymbolModel, symbols: np.ndarray, q: float) -> float:
    """Ideal code length sum(-log2 P(k)) of a symbol tensor."""
    symbols = np.asarray(symbols)
    if symbols.size == 0:
        return 0.0
    return float(-np.sum(model.log2_prob(symbols, q)))


def rd_loss(model: ChannelEntropyModel, y: LatentTensor, q: float, lam: float, distortion_scale: float = 1.0) -> float:
    """Rate in nats per element plus lam * distortion_scale * MSE of the scaled quantization."""
    q = model.check_rate(q)
    if lam < 0:
        raise InputError(f"lambda must be non-negative, got {lam}")
    y = as_latent(y, "latent")
    rate = rate_bits(model, symbolize(y, q), q)
    distortion = float(np.mean((quantize_scaled(y, q) - y) ** 2))
    return rate * math.log(2.0) / y.size + lam * distortion_scale * distortion


def entropy_model_sample(model: ChannelEntropyModel, q: float, shape, rng: SeededRng) -> LatentTensor:
    """
    Unit-variance noise drawn from the model's own discrete distribution.

    Symbols are drawn per channel from P(k), mapped to k * q and standardized
    with the analytic mean and deviation of that channel.
    """
    q = model.check_rate(q)
    shape = tuple(shape)
    if not shape or shape[-1] != model.channels:
        raise InputError(f"shape {shape} must end in {model.channels} channels")
    rows = int(np.prod(shape[:-1], dtype=np.int64))
    out = np.empty((rows, model.channels))
    for c in range(model.channels):
        mean, std = model.moments(c, q)
        if std <= 0.0:
            raise EntropyModelError(f"channel {c} has zero variance at q={q}; cannot normalize noise")
        k_lo, p = model.channel_pmf(c, q)
        k = k_lo + rng.choice(len(p), size=rows, p=p / p.sum())
        out[:, c] = (k * q - mean) / std
    return out.reshape(shape)
