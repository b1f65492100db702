"""Dense matrix containers, CSV interop and PGM image dumps.

Binary layout (all little-endian)::

    magic   4 bytes   b"BF64" (float64 entries) or b"BI08" (int8 entries)
    rows    uint64
    cols    uint64
    data    rows * cols entries, row-major

``BI08`` holds one-bit measurements as signed bytes (-1 / +1).
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

FLOAT_MAGIC = b"BF64"
SIGN_MAGIC = b"BI08"
_HEADER = struct.Struct("<4sQQ")
_DTYPES = {FLOAT_MAGIC: np.dtype("<f8"), SIGN_MAGIC: np.dtype("i1")}


def _write(path, magic, data):
    data = np.ascontiguousarray(data, dtype=_DTYPES[magic])
    if data.ndim != 2:
        raise InvalidInputError("only 2D arrays can be stored")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, data.shape[0], data.shape[1]))
        fh.write(data.tobytes(order="C"))


def _read(path):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise InvalidInputError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(raw)
    if magic not in _DTYPES:
        raise InvalidInputError(f"{path}: unknown magic {magic!r}")
    dtype = _DTYPES[magic]
    expected = _HEADER.size + rows * cols * dtype.itemsize
    if len(raw) != expected:
        raise InvalidInputError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size).reshape(rows, cols)
    return magic, data


def save_matrix(path, X):
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("refusing to store non-finite entries")
    _write(path, FLOAT_MAGIC, X)


def load_matrix(path):
    magic, data = _read(path)
    if magic != FLOAT_MAGIC:
        raise InvalidInputError(f"{path} does not hold a float matrix")
    return data.astype(float)


def save_measurements(path, Y):
    Y = np.asarray(Y)
    if not np.all(np.isin(Y, (-1, 1))):
        raise InvalidInputError("measurements must be +-1")
    _write(path, SIGN_MAGIC, Y.astype(np.int8))


def load_measurements(path):
    magic, data = _read(path)
    if magic != SIGN_MAGIC:
        raise InvalidInputError(f"{path} does not hold one-bit measurements")
    if not np.all(np.isin(data, (-1, 1))):
        raise InvalidInputError(f"{path}: entries outside {{-1, +1}}")
    return data.astype(float)


def save_csv(path, X):
    np.savetxt(path, np.asarray(X, dtype=float), delimiter=",", fmt="%.17g")


def load_csv(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def save_pgm(path, X):
    """Write ``X`` as an 8-bit binary PGM with per-image min-max scaling.

    Returns the ``(min, max)`` used; a constant image maps to all zeros.
    """
    X = np.asarray(X, dtype=float)
    lo, hi = float(X.min()), float(X.max())
    if hi > lo:
        img = np.rint((X - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        img = np.zeros(X.shape, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{X.shape[1]} {X.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    return lo, hi


def load_pgm(path):
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise InvalidInputError(f"{path} is not a binary PGM")
    width, height, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise InvalidInputError("only 8-bit PGM is supported")
    return np.frombuffer(parts[4], dtype=np.uint8).reshape(height, width)
