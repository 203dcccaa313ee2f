"""Reader/writer for the multiframe tensor interchange format.

The format is consumed from the data-generation toolkit as files; layout
(little-endian throughout): 4-byte magic ``TRNT``, u32 version (1), u32
rank, rank x u32 dims, then ``prod(dims)`` little-endian float32 values in
row-major order. Rank-4 tensors index as (frame, channel, row, column).

The companion manifest is plain text, one record per line:
``sequence_path<TAB>target_path<TAB>train|test`` with paths relative to the
manifest's directory.
"""

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"TRNT"
VERSION = 1


class TensorFormatError(Exception):
    """Malformed tensor file; ``offset`` locates the offending byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def _u32(blob: bytes, offset: int, what: str) -> int:
    if len(blob) < offset + 4:
        raise TensorFormatError(f"truncated while reading {what}", len(blob))
    return struct.unpack_from("<I", blob, offset)[0]


def read_tensor(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if len(blob) < 4:
        raise TensorFormatError("truncated while reading magic", len(blob))
    if blob[:4] != MAGIC:
        raise TensorFormatError(f"bad magic {blob[:4]!r}, expected {MAGIC!r}", 0)
    version = _u32(blob, 4, "version")
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}", 4)
    rank = _u32(blob, 8, "rank")
    dims = [_u32(blob, 12 + 4 * i, f"dimension {i}") for i in range(rank)]
    payload_offset = 12 + 4 * rank
    count = math.prod(dims)
    end = payload_offset + 4 * count
    if len(blob) < end:
        raise TensorFormatError(f"truncated payload: expected {4 * count} bytes", len(blob))
    if len(blob) > end:
        raise TensorFormatError(f"{len(blob) - end} trailing bytes", end)
    flat = np.frombuffer(blob, dtype="<f4", count=count, offset=payload_offset)
    finite = np.isfinite(flat)
    if not finite.all():
        bad = int(np.argmin(finite))
        raise TensorFormatError("non-finite value in payload", payload_offset + 4 * bad)
    return flat.astype(np.float32).reshape(dims)


def write_tensor(data, path) -> None:
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor payload must be finite")
    path = Path(path)
    blob = MAGIC + struct.pack("<II", VERSION, arr.ndim)
    blob += struct.pack(f"<{arr.ndim}I", *arr.shape)
    blob += arr.astype("<f4", copy=False).tobytes()
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


@dataclass(frozen=True)
class ManifestRow:
    sequence_path: Path
    target_path: Path
    split: str


def read_manifest(path) -> list[ManifestRow]:
    """Parse a manifest, resolving paths relative to its directory."""
    path = Path(path)
    base = path.parent
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[2] not in ("train", "test"):
            raise ValueError(f"{path}:{lineno}: malformed manifest line {line!r}")
        rows.append(ManifestRow(base / parts[0], base / parts[1], parts[2]))
    return rows
