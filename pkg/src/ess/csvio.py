"""CSV dialect shared by every artifact: comma separated, header row, LF
line endings, reals with 17 significant digits (round-trip exact)."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SchemaError


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    if v is None:
        return "nan"
    return "%.17g" % (float(v) + 0.0)  # + 0.0 folds -0.0 into 0.0


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    os.replace(tmp, path)
    return path


def write_columns(path, columns: Mapping[str, np.ndarray]) -> Path:
    header = list(columns)
    cols = [np.asarray(columns[k]) for k in header]
    n = len(cols[0]) if cols else 0
    return write_csv(path, header, (tuple(c[i] for c in cols) for i in range(n)))


def read_csv(path, required: Sequence[str] = ()) -> dict[str, np.ndarray]:
    """Numeric columns of a CSV; raise SchemaError on missing columns or no rows."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise SchemaError(f"{path.name}: empty file")
    header = lines[0].split(",")
    for col in required:
        if col not in header:
            raise SchemaError(f"{path.name}: missing column '{col}'")
    if len(lines) < 2:
        raise SchemaError(f"{path.name}: no data rows")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {h: data[:, k] for k, h in enumerate(header)}
