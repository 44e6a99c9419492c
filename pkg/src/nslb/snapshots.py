"""Binary snapshot files: magic 'NSLB', little-endian header, float64 payload.

Layout:  magic (4 bytes) | version u32 | n u32 | N u32 | ncomp u32 |
         time f64 | payload ncomp * N^n f64 row-major.
"""

from __future__ import annotations

import struct

import numpy as np

from .spectral import PhysicalField, TorusGrid

__all__ = ["write_snapshot", "read_snapshot", "SnapshotError", "MAGIC", "VERSION"]

MAGIC = b"NSLB"
VERSION = 1
_HEADER = struct.Struct("<4sIIIId")


class SnapshotError(ValueError):
    """Malformed snapshot file."""


def write_snapshot(path, field: PhysicalField, time):
    grid = field.grid
    header = _HEADER.pack(MAGIC, VERSION, grid.n, grid.N, field.ncomp, float(time))
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path):
    """Returns (PhysicalField, time); rejects bad magic, version, or truncation."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"truncated header: {len(raw)} bytes, need {_HEADER.size}")
    magic, version, n, big_n, ncomp, time = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported version {version}, reader supports {VERSION}")
    expected = ncomp * big_n**n * 8
    got = len(raw) - _HEADER.size
    if got != expected:
        raise SnapshotError(
            f"payload length mismatch at byte offset {_HEADER.size + got}: got {got} bytes, need {expected}"
        )
    grid = TorusGrid(n=int(n), N=int(big_n))
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape((ncomp,) + grid.shape)
    return PhysicalField(grid, values.copy()), float(time)
