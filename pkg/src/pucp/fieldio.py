"""Reader/writer for the ``.pucp`` binary field format.

Layout (little-endian): magic ``PUCP1``, version byte ``0x01``, u32
n_per_side, f64 domain_radius, f64 embed_side, f64 center_re, f64
center_im, u8 dtype (0 real f64, 1 complex as two f64), then the samples
row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import ComplexField, DiskGrid, RealField

MAGIC = b"PUCP1"
VERSION = 1
_HEADER = struct.Struct("<5sBIddddB")


class FieldFormatError(ValueError):
    pass


def write_field(path, field) -> None:
    g = field.grid
    if isinstance(field, ComplexField):
        dtype_code = 1
        data = np.ascontiguousarray(field.samples, dtype="<c16")
    elif isinstance(field, RealField):
        dtype_code = 0
        data = np.ascontiguousarray(field.samples, dtype="<f8")
    else:
        raise TypeError(f"cannot serialise {type(field).__name__}")
    header = _HEADER.pack(MAGIC, VERSION, g.n_per_side, g.domain_radius, g.embed_side,
                          g.center.real, g.center.imag, dtype_code)
    Path(path).write_bytes(header + data.tobytes(order="C"))


def read_field(path, expect: type | None = None):
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FieldFormatError("truncated header")
    magic, version, n, R, L, cre, cim, code = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FieldFormatError(f"unsupported version {version}")
    if code not in (0, 1):
        raise FieldFormatError(f"unknown dtype code {code}")
    grid = DiskGrid(n, R, L, complex(cre, cim))
    dt = np.dtype("<f8") if code == 0 else np.dtype("<c16")
    body = raw[_HEADER.size:]
    if len(body) != n * n * dt.itemsize:
        raise FieldFormatError(
            f"truncated payload: expected {n * n * dt.itemsize} bytes, got {len(body)}"
        )
    samples = np.frombuffer(body, dtype=dt).reshape(n, n).copy()
    cls = RealField if code == 0 else ComplexField
    if expect is not None and cls is not expect:
        raise FieldFormatError(f"dtype mismatch: file holds {cls.__name__}, wanted {expect.__name__}")
    # bypass the finiteness check so arbitrary stored data round-trips
    f = object.__new__(cls)
    samples.setflags(write=False)
    object.__setattr__(f, "grid", grid)
    object.__setattr__(f, "samples", samples)
    return f
