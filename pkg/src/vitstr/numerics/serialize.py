"""Named-tensor container.

Layout (all integers little-endian)::

    magic  b"VTNT"   u32 version   u32 count
    count x { u16 name_len, name (UTF-8), u8 dtype code, u8 ndim,
              u32 dims[ndim], raw little-endian values }
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Mapping

import numpy as np

MAGIC = b"VTNT"
VERSION = 1

_CODES = {1: np.dtype("<f4"), 2: np.dtype("<f8"), 3: np.dtype("<i8"), 4: np.dtype("u1")}
_BY_KIND = {(v.kind, v.itemsize): k for k, v in _CODES.items()}


class SerializationError(ValueError):
    pass


def write_tensors(fh: BinaryIO, tensors: Mapping[str, np.ndarray]) -> None:
    fh.write(MAGIC)
    fh.write(struct.pack("<II", VERSION, len(tensors)))
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        code = _BY_KIND.get((arr.dtype.kind, arr.dtype.itemsize))
        if code is None:
            raise SerializationError(f"unsupported dtype {arr.dtype} for tensor {name!r}")
        raw_name = name.encode("utf-8")
        fh.write(struct.pack("<H", len(raw_name)))
        fh.write(raw_name)
        fh.write(struct.pack("<BB", code, arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(np.ascontiguousarray(arr, dtype=_CODES[code]).tobytes())


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise SerializationError("truncated tensor container")
    return buf


def read_tensors(fh: BinaryIO) -> dict[str, np.ndarray]:
    if _read_exact(fh, 4) != MAGIC:
        raise SerializationError("not a named-tensor container (bad magic)")
    version, count = struct.unpack("<II", _read_exact(fh, 8))
    if version != VERSION:
        raise SerializationError(f"unsupported container version {version}")
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", _read_exact(fh, 2))
        name = _read_exact(fh, name_len).decode("utf-8")
        code, ndim = struct.unpack("<BB", _read_exact(fh, 2))
        if code not in _CODES:
            raise SerializationError(f"unknown dtype code {code} for tensor {name!r}")
        shape = struct.unpack(f"<{ndim}I", _read_exact(fh, 4 * ndim))
        dtype = _CODES[code]
        n = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(_read_exact(fh, n * dtype.itemsize), dtype=dtype).reshape(shape)
        out[name] = arr.astype(dtype.newbyteorder("="), copy=True)
    return out
