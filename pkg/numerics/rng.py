"""
Counter-based seeded random streams.

Each SeededRng addresses one block of a Philox stream: the key comes from
(seed, stream) through a SeedSequence, the block index is `counter`.
Identical (seed, stream, counter) always replays the same draws; different
stream ids give independent keys.
"""
from dataclasses import dataclass, field

import numpy as np

# Stream ids, one per purpose
STREAM_DATA = 0
STREAM_Q = 1
STREAM_NOISE = 2
STREAM_INIT = 3
STREAM_PROJECTIONS = 4
STREAM_CORRUPTION = 5

_MASK64 = (1 << 64) - 1


@dataclass
class SeededRng:
    """Deterministic random source for one (seed, stream, counter) block."""
    seed: int
    stream: int = 0
    counter: int = 0
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed <= _MASK64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")
        key = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream,)
        ).generate_state(2, dtype=np.uint64)
        # counter lives in the second 64-bit word; each block holds 2**64 draws
        philox = np.random.Philox(
            key=key, counter=np.array([0, self.counter & _MASK64, 0, 0], dtype=np.uint64)
        )
        self._generator = np.random.Generator(philox)

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def at(self, counter: int) -> "SeededRng":
        """Fresh rng on the same stream, positioned at block `counter`."""
        return SeededRng(self.seed, self.stream, counter)

    def derive(self, stream: int, counter: int = 0) -> "SeededRng":
        return SeededRng(self.seed, stream, counter)

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self._generator.uniform(low, high, size)

    def normal(self, size=None) -> np.ndarray:
        return self._generator.standard_normal(size)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self._generator.integers(low, high, size)

    def choice(self, n: int, size=None, p=None) -> np.ndarray:
        return self._generator.choice(n, size=size, p=p)

    def logistic(self, loc=0.0, scale=1.0, size=None) -> np.ndarray:
        return self._generator.logistic(loc, scale, size)
