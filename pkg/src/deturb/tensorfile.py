"""Binary multiframe tensor container crossing the training boundary.

Byte layout, all integers little-endian regardless of host:

    offset 0   magic   4 bytes, ASCII "TRNT"
    offset 4   version u32, currently 1
    offset 8   rank    u32
    offset 12  dims    rank x u32
    then       payload prod(dims) x f32 (IEEE-754), row-major; rank-4
               tensors index as (frame, channel, row, column)

Readers reject bad magic, unknown versions, truncation, trailing bytes and
non-finite payloads, reporting the byte offset of the problem. Writes are
atomic (temp file in the target directory, then rename).
"""

import math
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"TRNT"
VERSION = 1

_HEADER = struct.Struct("<I")


class TensorFormatError(Exception):
    """Malformed tensor file; ``offset`` locates the offending byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def write_tensor(data, path) -> None:
    """Serialize an array as float32. Bitwise-exact roundtrip for float32 input."""
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor payload must be finite")
    if any(d >= 2**32 for d in arr.shape):
        raise ValueError("dimensions must fit in unsigned 32-bit integers")
    path = Path(path)
    blob = bytearray()
    blob += MAGIC
    blob += _HEADER.pack(VERSION)
    blob += _HEADER.pack(arr.ndim)
    for d in arr.shape:
        blob += _HEADER.pack(d)
    blob += arr.astype("<f4", copy=False).tobytes()
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def _read_u32(blob: bytes, offset: int, what: str) -> int:
    if len(blob) < offset + 4:
        raise TensorFormatError(f"truncated while reading {what}", len(blob))
    return _HEADER.unpack_from(blob, offset)[0]


def read_tensor(path) -> np.ndarray:
    """Deserialize a tensor file, validating header, size and finiteness."""
    blob = Path(path).read_bytes()
    if len(blob) < 4:
        raise TensorFormatError("truncated while reading magic", len(blob))
    if blob[:4] != MAGIC:
        raise TensorFormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}", 0)
    version = _read_u32(blob, 4, "version")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}", 4)
    rank = _read_u32(blob, 8, "rank")
    dims = []
    for i in range(rank):
        dims.append(_read_u32(blob, 12 + 4 * i, f"dimension {i}"))
    payload_offset = 12 + 4 * rank
    count = math.prod(dims)
    payload_end = payload_offset + 4 * count
    if len(blob) < payload_end:
        raise TensorFormatError(
            f"truncated payload: expected {4 * count} bytes", len(blob)
        )
    if len(blob) > payload_end:
        raise TensorFormatError(
            f"{len(blob) - payload_end} trailing bytes after payload", payload_end
        )
    flat = np.frombuffer(blob, dtype="<f4", count=count, offset=payload_offset)
    finite = np.isfinite(flat)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise TensorFormatError(
            "non-finite value in payload", payload_offset + 4 * bad
        )
    return flat.astype(np.float32).reshape(dims)
