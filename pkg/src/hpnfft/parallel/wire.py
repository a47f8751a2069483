"""Binary frames exchanged between ranks.

All integers are little-endian::

    frame = b"HPNF" | version u16 (=1) | msg_type u16 | payload_len u64 | payload

======= ================ ===================================================
type    name             payload
======= ================ ===================================================
1       SUBCELL_ASSIGN   u32 d, u64 C, C x (d f64 coords, f64 re, f64 im)
2       COEFF_ARRAY      u32 d, d x u32 N_t, prod(N_t) x (f64 re, f64 im)
3       POINT_RESULTS    u64 count, count x (u64 index, f64 re, f64 im)
4       CONFIG           u8 window, f64 sigma, u32 m, u32 d, d x u32 N_t
5       SHUTDOWN         empty
======= ================ ===================================================

The POINT_RESULTS index is the position of the point inside the subcell it
was assigned with; the root maps it back to the global point order.
"""

from __future__ import annotations

import enum
import struct

import numpy as np

from ..errors import ProtocolError
from ..windows import WindowKind

MAGIC = b"HPNF"
VERSION = 1
HEADER = struct.Struct("<4sHHQ")


class MsgType(enum.IntEnum):
    SUBCELL_ASSIGN = 1
    COEFF_ARRAY = 2
    POINT_RESULTS = 3
    CONFIG = 4
    SHUTDOWN = 5


def frame(msg_type: MsgType, payload: bytes = b"") -> bytes:
    return HEADER.pack(MAGIC, VERSION, int(msg_type), len(payload)) + payload


def parse_header(header: bytes) -> tuple[MsgType, int]:
    if len(header) != HEADER.size:
        raise ProtocolError(f"truncated frame header ({len(header)} bytes)")
    magic, version, msg_type, length = HEADER.unpack(header)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"unsupported protocol version {version}")
    try:
        return MsgType(msg_type), length
    except ValueError:
        raise ProtocolError(f"unknown message type {msg_type}") from None


def unframe(data: bytes) -> tuple[MsgType, bytes]:
    msg_type, length = parse_header(data[:HEADER.size])
    payload = data[HEADER.size:]
    if len(payload) != length:
        raise ProtocolError(f"payload length {len(payload)} does not match header ({length})")
    return msg_type, payload


def _complex_pairs(values) -> np.ndarray:
    v = np.ascontiguousarray(values, dtype=np.complex128).ravel()
    return v.view("<f8").reshape(-1, 2)


def encode_subcell(points, values) -> bytes:
    points = np.asarray(points, dtype="<f8")
    C, d = points.shape
    rec = np.empty((C, d + 2), dtype="<f8")
    rec[:, :d] = points
    rec[:, d:] = _complex_pairs(values)
    return frame(MsgType.SUBCELL_ASSIGN, struct.pack("<IQ", d, C) + rec.tobytes())


def decode_subcell(payload: bytes) -> tuple[np.ndarray, np.ndarray]:
    _need(payload, 12, "SUBCELL_ASSIGN")
    d, C = struct.unpack_from("<IQ", payload)
    rec = _records(payload[12:], C * (d + 2), "SUBCELL_ASSIGN").reshape(C, d + 2)
    values = rec[:, d] + 1j * rec[:, d + 1]
    return rec[:, :d].copy(), values


def encode_coeffs(coeffs) -> bytes:
    coeffs = np.asarray(coeffs)
    head = struct.pack(f"<I{coeffs.ndim}I", coeffs.ndim, *coeffs.shape)
    return frame(MsgType.COEFF_ARRAY, head + _complex_pairs(coeffs).tobytes())


def decode_coeffs(payload: bytes) -> np.ndarray:
    _need(payload, 4, "COEFF_ARRAY")
    (d,) = struct.unpack_from("<I", payload)
    _need(payload, 4 + 4 * d, "COEFF_ARRAY")
    dims = struct.unpack_from(f"<{d}I", payload, 4)
    size = int(np.prod(dims, dtype=np.int64))
    pairs = _records(payload[4 + 4 * d:], 2 * size, "COEFF_ARRAY").reshape(size, 2)
    return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dims)


_RESULT = np.dtype([("index", "<u8"), ("re", "<f8"), ("im", "<f8")])


def encode_results(indices, values) -> bytes:
    values = np.asarray(values, dtype=np.complex128).ravel()
    rec = np.empty(values.shape[0], dtype=_RESULT)
    rec["index"] = indices
    rec["re"] = values.real
    rec["im"] = values.imag
    return frame(MsgType.POINT_RESULTS, struct.pack("<Q", rec.shape[0]) + rec.tobytes())


def decode_results(payload: bytes) -> tuple[np.ndarray, np.ndarray]:
    _need(payload, 8, "POINT_RESULTS")
    (count,) = struct.unpack_from("<Q", payload)
    body = payload[8:]
    if len(body) != count * _RESULT.itemsize:
        raise ProtocolError(f"POINT_RESULTS body has {len(body)} bytes for {count} records")
    rec = np.frombuffer(body, dtype=_RESULT)
    return rec["index"].astype(np.int64), rec["re"] + 1j * rec["im"]


def encode_config(kind: WindowKind, sigma: float, m: int, dims) -> bytes:
    dims = tuple(int(n) for n in dims)
    body = struct.pack("<BdII", WindowKind.parse(kind).value, sigma, m, len(dims))
    return frame(MsgType.CONFIG, body + struct.pack(f"<{len(dims)}I", *dims))


def decode_config(payload: bytes) -> tuple[WindowKind, float, int, tuple[int, ...]]:
    _need(payload, 17, "CONFIG")
    kind, sigma, m, d = struct.unpack_from("<BdII", payload)
    if len(payload) != 17 + 4 * d:
        raise ProtocolError("CONFIG payload length mismatch")
    try:
        kind = WindowKind(kind)
    except ValueError:
        raise ProtocolError(f"unknown window code {kind}") from None
    return kind, sigma, m, struct.unpack_from(f"<{d}I", payload, 17)


def encode_shutdown() -> bytes:
    return frame(MsgType.SHUTDOWN)


def _need(payload: bytes, n: int, what: str):
    if len(payload) < n:
        raise ProtocolError(f"{what} payload truncated")


def _records(body: bytes, count: int, what: str) -> np.ndarray:
    if len(body) != 8 * count:
        raise ProtocolError(f"{what} body has {len(body)} bytes, expected {8 * count}")
    return np.frombuffer(body, dtype="<f8")
