"""
Single-channel images: binary PGM (P5) I/O and procedural toy textures.

Pixel values live in [0, 1] in memory; files store 8-bit samples, or
16-bit big-endian ones when maxval exceeds 255.
"""
import logging
import math
from pathlib import Path
from typing import List, Tuple

import numpy as np

from numerics.errors import InputError
from numerics.rng import SeededRng

logger = logging.getLogger(__name__)


def _read_token(data: bytes, pos: int) -> Tuple[bytes, int]:
    """Next whitespace-separated header token, skipping # comments."""
    n = len(data)
    while pos < n:
        if data[pos:pos + 1].isspace():
            pos += 1
        elif data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace():
        pos += 1
    return data[start:pos], pos


def decode_pgm(data: bytes) -> np.ndarray:
    magic, pos = _read_token(data, 0)
    if magic != b"P5":
        raise InputError(f"not a binary PGM (magic {magic!r})")
    try:
        width_tok, pos = _read_token(data, pos)
        height_tok, pos = _read_token(data, pos)
        maxval_tok, pos = _read_token(data, pos)
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except ValueError as e:
        raise InputError(f"malformed PGM header: {e}") from e
    if width <= 0 or height <= 0 or not 0 < maxval < 65536:
        raise InputError(f"bad PGM header values {width}x{height}, maxval {maxval}")
    pos += 1  # single whitespace byte before the raster
    dtype = ">u2" if maxval > 255 else "u1"
    count = width * height
    if len(data) - pos < count * np.dtype(dtype).itemsize:
        raise InputError(f"PGM raster truncated: need {count} samples")
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
    return raster.reshape(height, width).astype(np.float64) / maxval


def encode_pgm(image: np.ndarray, maxval: int = 255) -> bytes:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise InputError(f"expected a 2-D image, got shape {image.shape}")
    dtype = ">u2" if maxval > 255 else "u1"
    raster = np.rint(np.clip(image, 0.0, 1.0) * maxval).astype(dtype)
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n{maxval}\n".encode("ascii")
    return header + raster.tobytes()


def read_pgm(path: Path) -> np.ndarray:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path: Path, image: np.ndarray, maxval: int = 255) -> None:
    Path(path).write_bytes(encode_pgm(image, maxval))


def load_corpus(directory: Path) -> List[Tuple[str, np.ndarray]]:
    """(name, image) for every *.pgm in the directory, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"corpus directory {directory} does not exist")
    images = [(p.name, read_pgm(p)) for p in sorted(directory.glob("*.pgm"))]
    if not images:
        raise InputError(f"no .pgm images in {directory}")
    logger.info(f"loaded {len(images)} images from {directory}")
    return images


def texture_patch(rng: SeededRng, size: int = 64) -> np.ndarray:
    """
    Procedural texture: oriented stripes over a gradient plus a few soft blobs,
    rescaled into [0.05, 0.95].
    """
    yy, xx = np.mgrid[0:size, 0:size] / size
    angle = rng.uniform(0.0, math.pi)
    freq = rng.uniform(1.0, 6.0)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    stripes = np.sin(2.0 * math.pi * freq * (xx * math.cos(angle) + yy * math.sin(angle)) + phase)
    gx, gy = rng.uniform(-1.0, 1.0, size=2)
    image = rng.uniform(0.2, 0.8) * stripes + gx * xx + gy * yy

    for _ in range(int(rng.integers(1, 4))):
        cx, cy = rng.uniform(0.0, 1.0, size=2)
        width = rng.uniform(0.05, 0.25)
        height = rng.uniform(-1.0, 1.0)
        image = image + height * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * width * width))

    lo, hi = image.min(), image.max()
    if hi - lo < 1e-12:
        return np.full((size, size), 0.5)
    return 0.05 + 0.9 * (image - lo) / (hi - lo)


def toy_corpus(seed: int, count: int, size: int = 64) -> List[Tuple[str, np.ndarray]]:
    """Deterministic texture corpus; image i comes from block i of the data stream."""
    base = SeededRng(seed)
    return [(f"texture_{i:04d}.pgm", texture_patch(base.at(i), size)) for i in range(count)]


def write_corpus(directory: Path, images: List[Tuple[str, np.ndarray]]) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, image in images:
        write_pgm(directory / name, image)
    logger.info(f"wrote {len(images)} images to {directory}")
