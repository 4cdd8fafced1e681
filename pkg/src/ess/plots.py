"""Plot-ready series (gnuplot .dat files) and a JSON summary of fitted quantities.

No rendering happens here; each .dat holds whitespace-separated columns
with a commented header line.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np

from .csvio import read_csv
from .errors import SchemaError
from .report import _plain
from .scenario import linear_fit

TRACE_REQUIRED = ("t", "a", "b", "log_a", "log_b")


def _write_dat(path: Path, names, cols) -> Path:
    cols = [np.asarray(c, dtype=float) for c in cols]
    tmp = path.with_suffix(".dat.tmp")
    with open(tmp, "w", newline="\n") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in zip(*cols):
            fh.write(" ".join("%.17g" % v for v in row) + "\n")
    os.replace(tmp, path)
    return path


def _kind(header) -> str:
    if "log_a" in header or "a" in header and "b" in header and "t" in header:
        return "trace"
    if "b1" in header or "b2" in header:
        return "residual"
    if "lambda" in header and "delta" in header:
        return "lambda"
    raise SchemaError("unrecognised CSV: expected a growth trace, residual or lambda-scaling file")


def _header(path: Path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if not first:
        raise SchemaError(f"{path.name}: empty file")
    return first.split(",")


def emit_plots(inputs, out) -> dict:
    """Write .dat series for each input CSV and ``plots_summary.json``; returns the summary."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {}
    written = []
    for src in map(Path, inputs):
        if not src.exists():
            raise SchemaError(f"input {src} does not exist")
        kind = _kind(_header(src))
        stem = src.stem
        if kind == "trace":
            d = read_csv(src, TRACE_REQUIRED)
            t, la = d["t"], d["log_a"]
            ll = np.log(-la)
            p = _write_dat(out / f"{stem}_loglog.dat", ("t", "loglog_inv_a"), (t, ll))
            written.append(p.name)
            p = _write_dat(out / f"{stem}_markers.dat", ("t", "log_a", "log_b"), (t, la, d["log_b"]))
            written.append(p.name)
            info = {"rows": int(len(t))}
            if len(t) >= 2:
                s, i, r2 = linear_fit(t, ll)
                info.update(loglog_slope=s, loglog_intercept=i, loglog_r2=r2)
            if "grad_lower_bound" in d:
                p = _write_dat(out / f"{stem}_gradient.dat", ("t", "grad_lower_bound"),
                               (t, d["grad_lower_bound"]))
                written.append(p.name)
            summary[src.name] = info
        elif kind == "residual":
            which = "b1" if "b1" in _header(src) else "b2"
            ucol = "u1_over_x1" if which == "b1" else "u2_over_x2"
            d = read_csv(src, ("radius", ucol, which))
            li = np.log(1.0 / d["radius"])
            p = _write_dat(out / f"{stem}_u_over_x.dat", ("log_inv_r", ucol), (li, d[ucol]))
            written.append(p.name)
            p = _write_dat(out / f"{stem}_{which}.dat", ("log_inv_r", which), (li, d[which]))
            written.append(p.name)
            ab = np.abs(d[which])
            s, i, r2 = linear_fit(li, d[ucol]) if len(li) >= 2 else (math.nan,) * 3
            summary[src.name] = {"rows": int(len(li)), "max_abs": float(ab.max()),
                                 "median_abs": float(np.median(ab)), "slope": s, "r2": r2}
        else:
            d = read_csv(src, ("delta", "lambda"))
            x = np.log(1.0 / d["delta"])
            p = _write_dat(out / f"{stem}.dat", ("log_inv_delta", "lambda"), (x, d["lambda"]))
            written.append(p.name)
            s, i, r2 = linear_fit(x, d["lambda"])
            summary[src.name] = {"slope": s, "intercept": i, "r2": r2}
    summary = {"inputs": summary, "files": written}
    tmp = out / "plots_summary.json.tmp"
    tmp.write_text(json.dumps(_plain(summary), indent=2, sort_keys=True) + "\n")
    os.replace(tmp, out / "plots_summary.json")
    return summary
