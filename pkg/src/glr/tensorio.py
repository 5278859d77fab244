"""Bit-exact binary tensor file format.

Layout (little-endian throughout):
  magic   8 bytes  b"GLRTENS1"
  ndim    u32
  dims    ndim x u32
  dtype   u8   (1 = float32, 2 = float64, 3 = uint8, 4 = complex128)
  payload row-major raw values

uint8 payloads are image data; by default they load scaled to [0, 1]
with the original peak (255) reported in the metadata.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"GLRTENS1"

DTYPE_CODES = {
    np.dtype(np.float32): 1,
    np.dtype(np.float64): 2,
    np.dtype(np.uint8): 3,
    np.dtype(np.complex128): 4,
}
CODE_DTYPES = {v: k for k, v in DTYPE_CODES.items()}


class TensorFileError(Exception):
    pass


class BadMagicError(TensorFileError):
    pass


class TruncatedPayloadError(TensorFileError):
    pass


class UnknownDtypeError(TensorFileError):
    pass


def write_tensor(path, t: np.ndarray) -> None:
    t = np.ascontiguousarray(t)
    if t.dtype not in DTYPE_CODES:
        raise UnknownDtypeError(f"unsupported dtype {t.dtype}")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", t.ndim))
        f.write(struct.pack(f"<{t.ndim}I", *t.shape))
        f.write(struct.pack("<B", DTYPE_CODES[t.dtype]))
        f.write(t.astype(t.dtype.newbyteorder("<")).tobytes())


def read_tensor(path, scale_u8: bool = True,
                with_meta: bool = False):
    """Read a tensor file. uint8 data is scaled to [0, 1] unless
    ``scale_u8`` is False; ``with_meta`` also returns {"peak": ...}."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 4 or raw[:8] != MAGIC:
        raise BadMagicError(f"{path}: not a GLR tensor file")
    off = 8
    (ndim,) = struct.unpack_from("<I", raw, off)
    off += 4
    if len(raw) < off + 4 * ndim + 1:
        raise TruncatedPayloadError(f"{path}: truncated header")
    dims = struct.unpack_from(f"<{ndim}I", raw, off)
    off += 4 * ndim
    (code,) = struct.unpack_from("<B", raw, off)
    off += 1
    if code not in CODE_DTYPES:
        raise UnknownDtypeError(f"{path}: unknown dtype code {code}")
    dt = CODE_DTYPES[code].newbyteorder("<")
    count = int(np.prod(dims)) if dims else 1
    expect = count * dt.itemsize
    if len(raw) - off != expect:
        raise TruncatedPayloadError(
            f"{path}: payload is {len(raw) - off} bytes, expected {expect}")
    t = np.frombuffer(raw, dtype=dt, count=count, offset=off).reshape(dims)
    t = t.astype(CODE_DTYPES[code])
    peak = 1.0
    if code == 3 and scale_u8:
        peak = 255.0
        t = t.astype(np.float64) / 255.0
    if with_meta:
        return t, {"peak": peak, "dtype_code": code}
    return t


def read_tile_file(path) -> np.ndarray:
    """Plain-text k x k integer grid for custom MSFA tiles."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([int(v) for v in line.split()])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise TensorFileError(f"{path}: malformed tile grid")
    return np.array(rows, dtype=np.int64)
