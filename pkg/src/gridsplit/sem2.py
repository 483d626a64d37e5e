"""Binary tensor file IO.

Layout (all little-endian):

    bytes 0-3   magic "SEM2" (53 45 4D 32)
    byte  4     format version, currently 1
    byte  5     rank, 1 through 4
    bytes 6-7   zero padding
    next        rank x u32 dimension sizes
    rest        prod(dims) x f32, row-major

Tensors round-trip as float32 arrays; callers upcast as needed.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ShapeError

MAGIC = b"SEM2"
VERSION = 1
_HEADER = struct.Struct("<4sBBxx")


def write_tensor(path: str | Path, data: np.ndarray) -> None:
    """Write an array (rank 1-4) as an f32 tensor file."""
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if not 1 <= arr.ndim <= 4:
        raise ShapeError(f"tensor rank must be 1-4, got {arr.ndim}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a tensor file back into a float32 array."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, rank = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if not 1 <= rank <= 4:
        raise FormatError(f"{path}: bad rank {rank}")
    dims_end = _HEADER.size + 4 * rank
    if len(raw) < dims_end:
        raise FormatError(f"{path}: truncated dimension block")
    dims = struct.unpack_from(f"<{rank}I", raw, _HEADER.size)
    count = 1
    for d in dims:
        count *= d
    if len(raw) != dims_end + 4 * count:
        raise FormatError(
            f"{path}: payload is {len(raw) - dims_end} bytes, expected {4 * count} for dims {dims}"
        )
    data = np.frombuffer(raw, dtype="<f4", count=count, offset=dims_end)
    return data.reshape(dims).copy()
