"""LCV1 weight checkpoints.

Layout (little-endian): magic ``LCV1``, u32 tensor count, then per tensor
u32 name length, UTF-8 name, u32 rank, rank × u64 dims, raw float32 data.
"""

from __future__ import annotations

import struct
from typing import Mapping

import numpy as np

from ..errors import CheckpointError
from ..utils import atomic_write_bytes

MAGIC = b"LCV1"


def encode_checkpoint(tensors: Mapping[str, np.ndarray]) -> bytes:
    parts = [MAGIC, struct.pack("<I", len(tensors))]
    for name, array in tensors.items():
        raw_name = name.encode("utf-8")
        array = np.asarray(array)
        parts.append(struct.pack("<I", len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack("<I", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        parts.append(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return b"".join(parts)


def decode_checkpoint(payload: bytes) -> dict[str, np.ndarray]:
    if payload[:4] != MAGIC:
        raise CheckpointError(f"bad magic {payload[:4]!r}, expected {MAGIC!r}")
    offset = 4

    def take(size: int) -> bytes:
        nonlocal offset
        if offset + size > len(payload):
            raise CheckpointError(f"checkpoint truncated at byte {offset}")
        chunk = payload[offset:offset + size]
        offset += size
        return chunk

    (count,) = struct.unpack("<I", take(4))
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4))
        name = take(name_len).decode("utf-8")
        (rank,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{rank}Q", take(8 * rank))
        size = int(np.prod(dims, dtype=np.int64))
        tensors[name] = np.frombuffer(take(4 * size), dtype="<f4").reshape(dims).copy()
    if offset != len(payload):
        raise CheckpointError(f"{len(payload) - offset} trailing bytes after the last tensor")
    return tensors


def save_checkpoint(path: str, tensors: Mapping[str, np.ndarray]) -> None:
    """Write atomically: a crash mid-write never leaves a partial file at ``path``."""
    atomic_write_bytes(path, encode_checkpoint(tensors))


def load_checkpoint(path: str) -> dict[str, np.ndarray]:
    try:
        with open(path, "rb") as f:
            payload = f.read()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    return decode_checkpoint(payload)
