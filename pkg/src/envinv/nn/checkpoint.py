"""Checkpoint container: one JSON metadata blob plus named float64 tensors.

Layout (all integers little-endian):

    bytes 0..7   magic "ENVINV01"
    u32          metadata length in bytes
    bytes        metadata, UTF-8 JSON (sorted keys)
    u32          tensor count
    per tensor:  u16 name length, name UTF-8,
                 u8 ndim, ndim x u64 dims,
                 prod(dims) x f64 values

Tensors are written in sorted name order so identical state produces
byte-identical files.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ENVINV01"


def save_checkpoint(path: Path | str, meta: dict, tensors: dict[str, np.ndarray]) -> None:
    parts = [MAGIC]
    meta_blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    parts.append(struct.pack("<I", len(meta_blob)))
    parts.append(meta_blob)
    parts.append(struct.pack("<I", len(tensors)))
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype="<f8")
        name_blob = name.encode("utf-8")
        parts.append(struct.pack("<H", len(name_blob)))
        parts.append(name_blob)
        parts.append(struct.pack("<B", arr.ndim))
        for dim in arr.shape:
            parts.append(struct.pack("<Q", dim))
        parts.append(arr.tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_checkpoint(path: Path | str) -> tuple[dict, dict[str, np.ndarray]]:
    blob = Path(path).read_bytes()
    if blob[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    off = len(MAGIC)

    def take(fmt: str) -> int:
        nonlocal off
        (value,) = struct.unpack_from(fmt, blob, off)
        off += struct.calcsize(fmt)
        return value

    meta_len = take("<I")
    meta = json.loads(blob[off : off + meta_len].decode("utf-8"))
    off += meta_len
    tensors: dict[str, np.ndarray] = {}
    for _ in range(take("<I")):
        name_len = take("<H")
        name = blob[off : off + name_len].decode("utf-8")
        off += name_len
        ndim = take("<B")
        shape = tuple(take("<Q") for _ in range(ndim))
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off).reshape(shape)
        off += count * 8
        tensors[name] = arr.astype(np.float64)
    return meta, tensors
