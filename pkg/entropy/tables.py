"""
Integer frequency tables bridging continuous P(k) and the range coder.

Every table totals exactly 2**16 with a floor of 1 per symbol, so any symbol
in the alphabet stays codable.
"""
from dataclasses import dataclass, field
from typing import List

import numpy as np

from numerics.errors import EntropyModelError, InputError

PRECISION_BITS = 16
TOTAL = 1 << PRECISION_BITS
MAX_ALPHABET = 1 << 12


def quantize_pmf(probs: np.ndarray) -> np.ndarray:
    """Round probabilities to integer frequencies summing to TOTAL, each >= 1."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or len(probs) == 0:
        raise InputError("pmf must be a non-empty vector")
    if len(probs) > MAX_ALPHABET:
        raise EntropyModelError(f"alphabet of {len(probs)} symbols exceeds {MAX_ALPHABET}")
    if np.any(~np.isfinite(probs)) or np.any(probs < 0.0):
        raise InputError("pmf must be finite and non-negative")

    freqs = np.maximum(1, np.rint(probs / probs.sum() * TOTAL)).astype(np.int64)
    diff = TOTAL - int(freqs.sum())
    if diff > 0:
        freqs[int(np.argmax(freqs))] += diff
    elif diff < 0:
        # take the excess from the most frequent symbols, never below 1
        for idx in np.argsort(-freqs, kind="stable"):
            take = min(int(freqs[idx]) - 1, -diff)
            freqs[idx] -= take
            diff += take
            if diff == 0:
                break
    return freqs


@dataclass
class FrequencyTable:
    """Frequencies for the contiguous alphabet [k_lo, k_lo + len(freqs) - 1]."""
    k_lo: int
    freqs: np.ndarray
    cum: np.ndarray = field(init=False, repr=False)
    # plain-int views used in the coder's inner loop
    cum_list: List[int] = field(init=False, repr=False)
    freq_list: List[int] = field(init=False, repr=False)

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.int64)
        if np.any(self.freqs < 1):
            raise EntropyModelError("every frequency must be >= 1")
        if int(self.freqs.sum()) != TOTAL:
            raise EntropyModelError(f"frequencies sum to {int(self.freqs.sum())}, expected {TOTAL}")
        self.k_lo = int(self.k_lo)
        self.cum = np.concatenate([[0], np.cumsum(self.freqs)])
        self.cum_list = [int(c) for c in self.cum]
        self.freq_list = [int(f) for f in self.freqs]

    @classmethod
    def from_probs(cls, k_lo: int, probs: np.ndarray) -> "FrequencyTable":
        return cls(k_lo, quantize_pmf(probs))

    @classmethod
    def uniform(cls, k_lo: int, k_hi: int) -> "FrequencyTable":
        return cls.from_probs(k_lo, np.ones(k_hi - k_lo + 1))

    @property
    def k_hi(self) -> int:
        return self.k_lo + len(self.freqs) - 1

    def __len__(self) -> int:
        return len(self.freqs)

    def code_length(self, k: int) -> float:
        """Ideal code length in bits of symbol k under the integer table."""
        return PRECISION_BITS - float(np.log2(self.freqs[k - self.k_lo]))

    def shannon_bits(self, symbols) -> float:
        idx = np.asarray(symbols, dtype=np.int64) - self.k_lo
        return float(np.sum(PRECISION_BITS - np.log2(self.freqs[idx])))
