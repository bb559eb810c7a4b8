"""
RDMB bitstream container.

Header (little-endian): b"RDMB", u32 version, u64 bit pattern of q_0,
u32 original height, u32 original width, u32 latent rank, u32 per dim,
u64 entropy-model id, u32 payload length; the range-coded payload follows.
"""
import struct
from dataclasses import dataclass
from typing import Tuple

from numerics.errors import BitstreamError

MAGIC = b"RDMB"
VERSION = 1

_HEAD = struct.Struct("<4sIQIII")
_TAIL = struct.Struct("<QI")


def float_bits(value: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", value))[0]


def bits_float(bits: int) -> float:
    return struct.unpack("<d", struct.pack("<Q", bits))[0]


@dataclass(frozen=True)
class BitstreamHeader:
    q_0: float
    height: int
    width: int
    latent_shape: Tuple[int, ...]
    model_id: int
    payload_length: int

    @property
    def pixels(self) -> int:
        return self.height * self.width

    @property
    def symbol_count(self) -> int:
        count = 1
        for dim in self.latent_shape:
            count *= dim
        return count

    def to_bytes(self) -> bytes:
        rank = len(self.latent_shape)
        return (
            _HEAD.pack(MAGIC, VERSION, float_bits(self.q_0), self.height, self.width, rank)
            + struct.pack(f"<{rank}I", *self.latent_shape)
            + _TAIL.pack(self.model_id, self.payload_length)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> Tuple["BitstreamHeader", int]:
        """Parse a header; returns it with the offset of the payload."""
        if len(data) < _HEAD.size:
            raise BitstreamError(f"file of {len(data)} bytes is too short for an RDMB header")
        magic, version, q_bits, height, width, rank = _HEAD.unpack_from(data, 0)
        if magic != MAGIC:
            raise BitstreamError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise BitstreamError(f"unsupported RDMB version {version}")
        end = _HEAD.size + 4 * rank + _TAIL.size
        if len(data) < end:
            raise BitstreamError("RDMB header truncated")
        dims = struct.unpack_from(f"<{rank}I", data, _HEAD.size)
        model_id, payload_length = _TAIL.unpack_from(data, _HEAD.size + 4 * rank)
        return cls(bits_float(q_bits), height, width, tuple(dims), model_id, payload_length), end
