"""
Carry-less 64-bit range coder over 16-bit frequency tables.

Normalization follows the classic carry-less scheme: a byte leaves the coder
once the top byte of [low, low + range) is settled, and when the range shrinks
below BOT without settling, it is cut back to the next BOT boundary. The
encoder flushes only as many bytes as are needed to pin a value inside the
final interval; the decoder reads zeros past the end of the payload.
"""
from bisect import bisect_right
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from numerics.errors import BitstreamError, SymbolRangeError

from .tables import PRECISION_BITS, TOTAL, FrequencyTable

MASK = (1 << 64) - 1
TOP = 1 << 56
BOT = 1 << 32


@dataclass(frozen=True)
class Bitstream:
    """Range-coded payload."""
    payload: bytes

    @property
    def bit_length(self) -> int:
        return 8 * len(self.payload)


def tile_tables(channel_tables: Sequence[FrequencyTable], count: int) -> List[FrequencyTable]:
    """Per-position tables for a row-major tensor whose last axis is the channel."""
    channels = len(channel_tables)
    if count % channels:
        raise ValueError(f"{count} symbols do not fill whole rows of {channels} channels")
    return list(channel_tables) * (count // channels)


def range_encode(symbols: Sequence[int], tables: Sequence[FrequencyTable]) -> Bitstream:
    """Encode symbols[i] with tables[i]; raises SymbolRangeError on a symbol
    outside its table's alphabet."""
    symbols = np.asarray(symbols, dtype=np.int64).ravel().tolist()
    if len(tables) != len(symbols):
        raise ValueError(f"{len(symbols)} symbols but {len(tables)} tables")

    out = bytearray()
    low, rng = 0, MASK
    for pos, (k, table) in enumerate(zip(symbols, tables)):
        idx = k - table.k_lo
        if idx < 0 or idx >= len(table.freq_list):
            raise SymbolRangeError(f"symbol {k} at position {pos} outside [{table.k_lo}, {table.k_hi}]", pos)
        r = rng >> PRECISION_BITS
        low += table.cum_list[idx] * r
        rng = table.freq_list[idx] * r
        while True:
            if (low ^ (low + rng)) >= TOP:
                if rng >= BOT:
                    break
                rng = -low & (BOT - 1)
            out.append(low >> 56)
            low = (low << 8) & MASK
            rng <<= 8

    # shortest prefix whose zero-extension still lies in [low, low + rng)
    for nbytes in range(9):
        grain = 1 << (64 - 8 * nbytes)
        value = -(-low // grain) * grain
        if value < low + rng:
            out.extend(value.to_bytes(8, "big")[:nbytes])
            break
    return Bitstream(bytes(out))


def range_decode(bitstream: Bitstream, tables: Sequence[FrequencyTable], count: int) -> np.ndarray:
    """Decode `count` symbols; tables[i] must be the table used at position i."""
    if len(tables) < count:
        raise ValueError(f"need {count} tables, got {len(tables)}")
    data = bitstream.payload
    size = len(data)
    pos = 8
    code = int.from_bytes(data[:8].ljust(8, b"\0"), "big")
    low, rng = 0, MASK
    symbols = [0] * count

    for i in range(count):
        table = tables[i]
        r = rng >> PRECISION_BITS
        value = (code - low) // r
        if value < 0 or value >= TOTAL:
            raise BitstreamError("corrupt range-coded payload", i)
        idx = bisect_right(table.cum_list, value) - 1
        symbols[i] = table.k_lo + idx
        low += table.cum_list[idx] * r
        rng = table.freq_list[idx] * r
        while True:
            if (low ^ (low + rng)) >= TOP:
                if rng >= BOT:
                    break
                rng = -low & (BOT - 1)
            byte = data[pos] if pos < size else 0
            pos += 1
            code = ((code << 8) | byte) & MASK
            low = (low << 8) & MASK
            rng <<= 8

    if pos - 8 > size:
        raise BitstreamError(f"payload of {size} bytes exhausted after {pos - 8} bytes were needed")
    return np.asarray(symbols, dtype=np.int64)
