"""Snapshot export: node CSV and the compact ESS1 binary grid dump.

ESS1 layout (little endian)::

    bytes 0-3    magic b"ESS1"
    uint32       format version (1)
    uint32       n1, n2          node counts along x1 and x2
    float64      h_min, h_max    smallest and largest node spacing
    float64[n1]  x1 coordinates
    float64[n2]  x2 coordinates
    float64[n1*n2] values, row-major with x1 the slow index
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from ..csvio import write_columns
from ..errors import SchemaError
from .grid import Grid

MAGIC = b"ESS1"
VERSION = 1


def field_csv(path, grid: Grid, full_values: np.ndarray) -> Path:
    """Rows (x1, x2, value) for nodes inside the domain, in flat index order."""
    idx = grid.unknowns
    P = grid.coords(idx)
    return write_columns(path, {"x1": P[:, 0], "x2": P[:, 1],
                                "value": np.asarray(full_values).ravel()[idx]})


def write_ess1(path, grid: Grid, full_values: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    vals = np.ascontiguousarray(np.asarray(full_values, dtype="<f8").reshape(grid.shape))
    n1, n2 = grid.shape
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, n1, n2))
        fh.write(struct.pack("<dd", grid.h_min, grid.h_max))
        fh.write(grid.x1.astype("<f8").tobytes())
        fh.write(grid.x2.astype("<f8").tobytes())
        fh.write(vals.tobytes())
    os.replace(tmp, path)
    return path


def read_ess1(path) -> dict:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise SchemaError("not an ESS1 file")
    version, n1, n2 = struct.unpack_from("<III", raw, 4)
    h_min, h_max = struct.unpack_from("<dd", raw, 16)
    off = 32
    x1 = np.frombuffer(raw, "<f8", n1, off)
    off += 8 * n1
    x2 = np.frombuffer(raw, "<f8", n2, off)
    off += 8 * n2
    vals = np.frombuffer(raw, "<f8", n1 * n2, off).reshape(n1, n2)
    return {"version": version, "x1": x1, "x2": x2, "h_min": h_min, "h_max": h_max,
            "values": vals}
