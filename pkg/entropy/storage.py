"""
RDME entropy-model file.

Layout (little-endian): b"RDME", u32 version, u32 channel count, q_min and
q_max as raw float64 bit patterns, per channel (mu, log s) as float64, then
the u64 model id (first 8 bytes of SHA-256 over everything between the
version and the id).
"""
import struct
from pathlib import Path

import numpy as np

from numerics.errors import CheckpointError, InputError

from .model import ChannelEntropyModel

MAGIC = b"RDME"
VERSION = 1

_PREFIX = struct.Struct("<4sII")
_RANGE = struct.Struct("<dd")
_ID = struct.Struct("<Q")


def model_to_bytes(model: ChannelEntropyModel) -> bytes:
    return MAGIC + struct.pack("<I", VERSION) + model.body_bytes() + _ID.pack(model.model_id)


def model_from_bytes(data: bytes) -> ChannelEntropyModel:
    if len(data) < _PREFIX.size + _RANGE.size + _ID.size:
        raise CheckpointError(f"entropy model file too short ({len(data)} bytes)")
    magic, version, channels = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise CheckpointError(f"unsupported RDME version {version}")
    expected = _PREFIX.size + _RANGE.size + 16 * channels + _ID.size
    if len(data) != expected:
        raise CheckpointError(f"entropy model file has {len(data)} bytes, expected {expected} for {channels} channels")

    q_min, q_max = _RANGE.unpack_from(data, _PREFIX.size)
    params = np.frombuffer(data, dtype="<f8", count=2 * channels, offset=_PREFIX.size + _RANGE.size)
    params = params.astype(np.float64).reshape(channels, 2)
    (stored_id,) = _ID.unpack_from(data, len(data) - _ID.size)
    try:
        model = ChannelEntropyModel(params[:, 0], params[:, 1], q_min=q_min, q_max=q_max)
    except InputError as e:
        raise CheckpointError(f"invalid entropy model parameters: {e}") from e
    if model.model_id != stored_id:
        raise CheckpointError(f"content hash mismatch: stored {stored_id:016x}, computed {model.model_id:016x}")
    return model


def save_entropy_model(path: Path, model: ChannelEntropyModel) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_entropy_model(path: Path) -> ChannelEntropyModel:
    return model_from_bytes(Path(path).read_bytes())
