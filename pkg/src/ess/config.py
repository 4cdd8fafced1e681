"""Experiment configuration: JSON schema, defaults and cross-field validation."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import ConfigError, EssError
from .geometry import Disk, Domain, Ellipse
from .keylemma import SectorSpec

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int_pos = {"type": "integer", "minimum": 1}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ess experiment",
    **_obj({
        "domain": _obj({
            "kind": {"enum": ["disk", "ellipse"]},
            "radius": _pos,
            "a": _pos,
            "b": _pos,
            "validity_radius": {"anyOf": [_pos, {"type": "null"}]},
        }, required=["kind"]),
        "initial_data": _obj({
            "epsilon": _pos,
            "delta_strip": _pos,
            "profile": {"enum": ["smoothstep_quintic", "bump_exponential", "zero"]},
        }),
        "sector": _obj({
            "gamma": _pos,
            "delta": _pos,
            "rays_b1": {"type": "array", "items": _num, "minItems": 1},
            "rays_b2": {"type": "array", "items": _num, "minItems": 1},
            "radii": {"type": "array", "items": _pos, "minItems": 2},
        }),
        "solver": _obj({
            "grid": {"type": "integer", "minimum": 16},
            "grading": {"type": "number", "minimum": 0},
            "poisson_rtol": _pos,
            "quad_rtol": _pos,
            "quad_max_cells": _int_pos,
        }),
        "evolution": _obj({
            "dt": _pos,
            "t_max": {"type": "number", "minimum": 0},
            "cfl_cap": _pos,
            "interpolation": {"enum": ["bilinear", "bicubic"]},
            "resymmetrize": {"type": "boolean"},
            "snapshot_every": _int_pos,
            "dump_every": {"type": "integer", "minimum": 0},
            "scale_floor": _pos,
        }),
        "validation": _obj({
            "geometry_samples": _int_pos,
            "lambda_deltas": {"type": "array", "items": _pos, "minItems": 3},
            "lambda_corner": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "outflow_levels": _int_pos,
        }),
        "output": _obj({
            "directory": {"type": "string", "minLength": 1},
            "formats": {"type": "array", "items": {"enum": ["csv", "json", "ess1"]},
                        "uniqueItems": True},
        }),
        "seed": {"type": "integer", "minimum": 0},
    }, required=["domain"]),
}

DEFAULTS = {
    "domain": {"kind": "disk", "validity_radius": None},
    "initial_data": {"epsilon": 0.05, "delta_strip": 1e-3, "profile": "smoothstep_quintic"},
    "sector": {"gamma": math.pi / 4, "delta": 2.0**-4, "rays_b1": [0.0],
               "rays_b2": [3 * math.pi / 8], "radii": [2.0**-k for k in range(4, 10)]},
    "solver": {"grid": 512, "grading": 5.0, "poisson_rtol": 1e-10, "quad_rtol": 1e-6,
               "quad_max_cells": 10**6},
    "evolution": {"dt": 2e-3, "t_max": 4.0, "cfl_cap": 4.0, "interpolation": "bicubic",
                  "resymmetrize": True, "snapshot_every": 25, "dump_every": 0,
                  "scale_floor": 1e-300},
    "validation": {"geometry_samples": 10000, "lambda_deltas": [1e-2, 1e-3, 1e-4],
                   "lambda_corner": [1e-6, 1e-6], "outflow_levels": 8},
    "output": {"directory": "ess_out", "formats": ["csv", "json"]},
    "seed": 0,
}


_SHAPE_DEFAULTS = {"disk": {"radius": 1.0}, "ellipse": {"a": 1.0, "b": 0.75}}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class ExperimentConfig:
    data: dict
    source: str = "<dict>"

    # section access -------------------------------------------------
    def __getitem__(self, key):
        return self.data[key]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    def canonical(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"), allow_nan=False)

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def build_domain(self) -> Domain:
        d = self.data["domain"]
        kw = {} if d.get("validity_radius") is None else {"validity_radius": d["validity_radius"]}
        if d["kind"] == "disk":
            return Disk(d.get("radius", 1.0), **kw)
        return Ellipse(d.get("a", 1.0), d.get("b", 0.75), **kw)

    def sector(self) -> SectorSpec:
        s = self.data["sector"]
        return SectorSpec(s["gamma"], s["delta"])

    def with_overrides(self, **sections) -> "ExperimentConfig":
        return load_config(_merge(self.data, sections), self.source)


def _where(path) -> str:
    return ".".join(str(p) for p in path) or "<root>"


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return f" (line {i})"
    return ""


def _cross_check(cfg: dict) -> list[tuple[str, str]]:
    errs = []
    d = cfg["domain"]
    if d["kind"] == "disk" and ("a" in d or "b" in d):
        errs.append(("domain", "disk takes 'radius', not 'a'/'b'"))
    if d["kind"] == "ellipse" and "radius" in d:
        errs.append(("domain", "ellipse takes 'a' and 'b', not 'radius'"))
    try:
        dom = ExperimentConfig(cfg).build_domain()
    except EssError as exc:
        return errs + [("domain", str(exc))]
    vr = dom.validity_radius
    ini = cfg["initial_data"]
    eps, dlt = ini["epsilon"], ini["delta_strip"]
    if not eps < 1:
        errs.append(("initial_data.epsilon", "epsilon must be below 1"))
    elif not eps**10 < dlt:
        errs.append(("initial_data.epsilon", "the ramp width epsilon^10 must be below delta_strip"))
    if dlt > vr:
        errs.append(("initial_data.delta_strip", f"delta_strip exceeds the validity radius {vr:g}"))
    if eps >= dom.s_max:
        errs.append(("initial_data.epsilon", "b(0) = epsilon must lie inside the domain"))
    s = cfg["sector"]
    if not 0 < s["gamma"] < math.pi / 2:
        errs.append(("sector.gamma", "gamma must lie in (0, pi/2)"))
    if s["delta"] > vr:
        errs.append(("sector.delta", f"sector radius exceeds the validity radius {vr:g}"))
    if max(s["radii"]) > s["delta"] * (1 + 1e-12):
        errs.append(("sector.radii", "sample radii must not exceed the sector radius"))
    for ph in s["rays_b1"]:
        if not -math.pi / 2 <= ph <= math.pi / 2 - s["gamma"] + 1e-12:
            errs.append(("sector.rays_b1", f"ray {ph:g} lies outside the sector for b1"))
    for ph in s["rays_b2"]:
        if not s["gamma"] - 1e-12 <= ph < math.pi / 2:
            errs.append(("sector.rays_b2", f"ray {ph:g} lies outside the sector for b2"))
    v = cfg["validation"]
    if min(v["lambda_deltas"]) <= max(v["lambda_corner"]):
        errs.append(("validation.lambda_corner", "corner must lie below every strip width"))
    if max(v["lambda_deltas"]) > vr:
        errs.append(("validation.lambda_deltas", "strip widths must not exceed the validity radius"))
    e = cfg["evolution"]
    if e["scale_floor"] >= eps**10:
        errs.append(("evolution.scale_floor", "floor must lie below a(0) = epsilon^10"))
    return errs


def load_config(src, source: str | None = None) -> ExperimentConfig:
    """Load and validate a config from a path, a JSON string or a dict.

    Missing sections and keys take the defaults; unknown keys are rejected.
    """
    text = None
    if isinstance(src, dict):
        raw, source = src, source or "<dict>"
    else:
        p = Path(src)
        if isinstance(src, Path) or (isinstance(src, str) and not src.lstrip().startswith("{")):
            try:
                text = p.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {src}: {exc}") from exc
            source = source or str(p)
        else:
            text, source = str(src), source or "<string>"
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: invalid JSON at line {exc.lineno} column {exc.colno}: "
                              f"{exc.msg}") from exc
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(raw),
                    key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        key = str(e.absolute_path[-1]) if e.absolute_path else ""
        if e.validator == "additionalProperties":
            key = e.message.split("'")[1] if "'" in e.message else key
        raise ConfigError(f"{source}: {_where(e.absolute_path)}: {e.message}"
                          f"{_line_of(text, key)}")
    merged = _merge(DEFAULTS, raw)
    for k, v in _SHAPE_DEFAULTS[merged["domain"]["kind"]].items():
        merged["domain"].setdefault(k, v)
    problems = _cross_check(merged)
    if problems:
        key, msg = problems[0]
        raise ConfigError(f"{source}: {key}: {msg}{_line_of(text, key.split('.')[-1])}")
    return ExperimentConfig(merged, source)


def default_config(**sections) -> ExperimentConfig:
    return load_config(_merge(DEFAULTS, sections))


def schema_json() -> str:
    return json.dumps(SCHEMA, indent=2, sort_keys=True)
