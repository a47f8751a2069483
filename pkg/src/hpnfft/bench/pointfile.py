"""Binary point files.

Layout (little-endian)::

    b"NDPT" | version u16 (=1) | dim u32 | count u64 | count x (dim f64 coords, f64 re, f64 im)

The header is 18 bytes. Coordinates must lie in ``[-0.5, 0.5)``.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from ..core import as_points, as_values
from ..errors import FormatError

MAGIC = b"NDPT"
VERSION = 1
HEADER = struct.Struct("<4sHIQ")


def write_points(path: str | os.PathLike, x, f) -> None:
    x = as_points(x)
    f = as_values(f, x.shape[0])
    M, d = x.shape
    rec = np.empty((M, d + 2), dtype="<f8")
    rec[:, :d] = x
    rec[:, d] = f.real
    rec[:, d + 1] = f.imag
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, d, M))
        fh.write(rec.tobytes())


def read_points(path: str | os.PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read a point file, returning ``(x, f)``.

    Raises
    ------
    FormatError
        On a bad header, a truncated body or a coordinate outside
        ``[-0.5, 0.5)``; the error carries the byte offset.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < HEADER.size:
        raise FormatError(f"file holds {len(data)} bytes, shorter than the header", len(data))
    magic, version, d, count = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if d < 1:
        raise FormatError("dimension must be at least 1", 6)
    rec_size = 8 * (d + 2)
    expected = HEADER.size + count * rec_size
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes for {count} records, found {len(data)}",
                          min(len(data), expected))
    rec = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(count, d + 2)
    coords = rec[:, :d]
    bad = ~((coords >= -0.5) & (coords < 0.5))
    if bad.any():
        j, t = map(int, np.argwhere(bad)[0])
        raise FormatError(f"record {j} coordinate {t} = {coords[j, t]!r} outside [-0.5, 0.5)",
                          HEADER.size + j * rec_size + 8 * t)
    return coords.astype(np.float64), rec[:, d] + 1j * rec[:, d + 1]
