"""
RDMC checkpoint container: named float64 tensors in one little-endian file.

Layout: b"RDMC", u32 version, u32 tensor count, then per tensor
u32 name length, UTF-8 name, u32 rank, u32 dims, raw <f8 data.
"""
import struct
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .denoiser import DenoiserParams
from .errors import CheckpointError
from .optim import OptimizerState

MAGIC = b"RDMC"
VERSION = 1

_OPT_PREFIX = "optim."


def pack_tensors(tensors: Dict[str, np.ndarray], magic: bytes = MAGIC, version: int = VERSION) -> bytes:
    parts = [magic, struct.pack("<II", version, len(tensors))]
    for name, tensor in tensors.items():
        raw_name = name.encode("utf-8")
        arr = np.ascontiguousarray(tensor, dtype="<f8")
        parts.append(struct.pack("<I", len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack(f"<I{arr.ndim}I", arr.ndim, *arr.shape))
        parts.append(arr.tobytes())
    return b"".join(parts)


def unpack_tensors(data: bytes, magic: bytes = MAGIC, version: int = VERSION) -> Dict[str, np.ndarray]:
    if data[:4] != magic:
        raise CheckpointError(f"bad magic {data[:4]!r}, expected {magic!r}")
    try:
        found_version, count = struct.unpack_from("<II", data, 4)
        if found_version != version:
            raise CheckpointError(f"unsupported {magic.decode()} version {found_version}")
        offset = 12
        tensors = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", data, offset)
            offset += 4
            name = data[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<I", data, offset)
            dims = struct.unpack_from(f"<{rank}I", data, offset + 4)
            offset += 4 + 4 * rank
            size = int(np.prod(dims, dtype=np.int64))
            end = offset + 8 * size
            if end > len(data):
                raise CheckpointError(f"tensor {name} truncated")
            tensors[name] = np.frombuffer(data[offset:end], dtype="<f8").astype(np.float64).reshape(dims)
            offset = end
    except (struct.error, UnicodeDecodeError) as e:
        raise CheckpointError(f"corrupt {magic.decode()} container: {e}") from e
    if offset != len(data):
        raise CheckpointError(f"{len(data) - offset} trailing bytes after last tensor")
    return tensors


def optimizer_tensors(state: OptimizerState) -> Dict[str, np.ndarray]:
    """AdamW step counter, hyperparameters and moments as `optim.*` tensors."""
    tensors = {
        _OPT_PREFIX + "hyper": np.array(
            [state.step, state.lr, state.weight_decay, state.betas[0], state.betas[1], state.eps]
        )
    }
    for name, m in state.m.items():
        tensors[f"{_OPT_PREFIX}m.{name}"] = m
    for name, v in state.v.items():
        tensors[f"{_OPT_PREFIX}v.{name}"] = v
    return tensors


def optimizer_from_tensors(tensors: Dict[str, np.ndarray]) -> Optional[OptimizerState]:
    """Inverse of optimizer_tensors; None when no `optim.hyper` entry is present."""
    hyper = tensors.get(_OPT_PREFIX + "hyper")
    if hyper is None:
        return None
    if hyper.shape != (6,):
        raise CheckpointError(f"optimizer header has shape {hyper.shape}, expected (6,)")
    state = OptimizerState(
        step=int(hyper[0]),
        lr=float(hyper[1]),
        weight_decay=float(hyper[2]),
        betas=(float(hyper[3]), float(hyper[4])),
        eps=float(hyper[5]),
    )
    for key, value in tensors.items():
        if key.startswith(_OPT_PREFIX + "m."):
            state.m[key[len(_OPT_PREFIX) + 2:]] = value
        elif key.startswith(_OPT_PREFIX + "v."):
            state.v[key[len(_OPT_PREFIX) + 2:]] = value
    return state


def save_checkpoint(path: Path, params: DenoiserParams, state: OptimizerState = None) -> None:
    """Write params, plus AdamW moments and step counter when given."""
    tensors = dict(params.tensors)
    if state is not None:
        tensors.update(optimizer_tensors(state))
    Path(path).write_bytes(pack_tensors(tensors))


def load_checkpoint(path: Path) -> Tuple[DenoiserParams, Optional[OptimizerState]]:
    """Read a checkpoint; the optimizer state is None when none was stored."""
    tensors = unpack_tensors(Path(path).read_bytes())
    params = DenoiserParams({k: v for k, v in tensors.items() if not k.startswith(_OPT_PREFIX)})
    try:
        params.validate()
    except ValueError as e:
        raise CheckpointError(f"{path}: {e}") from e
    return params, optimizer_from_tensors(tensors)
