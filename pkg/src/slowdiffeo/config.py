"""Run configuration: loading, validation and defaults.

Config files are YAML (``.yaml``/``.yml``) or JSON (``.json``).  Schema::

    map:
      variant: chart | example1 | example2       (default chart)
      F: sin | cos | zero | const:<c> | {harmonics: [[m, a, b], ...], c0: <c>}
      alpha: golden | silver | bronze | sqrt3 | <float> | {family: ..., ...}
      A: {dim: 1, r_plateau: 0.3, r_support: 0.6} | zero
      resonant: {depth: <int>, base: 8}          (replaces F and alpha)
    psi: power:<beta> | log | loglog | {kind: table, table: [[x, y], ...]}
    grids: {phi_grid: null, u_grid: 257, sphere_grid: 32}
    schedule: dyadic:<max> | list:<n1,n2,...> | [n1, n2, ...]
    seed: 0
    output: out
    weyl: {N: 1024, grid: null}
    orbit: {point: [lam, theta, z], steps: 100}
    flux: {variant: null}
    volcheck: {m: 100, samples: 1000000, bins: 16, sampling: stratified}

Every failure raises :class:`ConfigError` whose message starts with the
violated rule.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .diffeo import VARIANTS, MapConfig
from .growth import GridSpec, dyadic_schedule
from .numeric import BumpProfile, FourierSeries, ZeroBump
from .psi import PsiSpec, psi_validate
from .rotation import alpha_make, resonant_pair

DEFAULTS = {
    "map": {
        "variant": "chart",
        "F": "sin",
        "alpha": "golden",
        "A": {"dim": 1, "r_plateau": 0.3, "r_support": 0.6},
    },
    "psi": "power:0.5",
    "grids": {"phi_grid": None, "u_grid": 257, "sphere_grid": 32},
    "schedule": "dyadic:131072",
    "seed": 0,
    "output": "out",
    "weyl": {"N": 1024, "grid": None},
    "orbit": {"point": [0.1, 0.2, 0.0], "steps": 100},
    "flux": {"variant": None},
    "volcheck": {"m": 100, "samples": 1_000_000, "bins": 16, "sampling": "stratified"},
}

_MAP_KEYS = {"variant", "F", "alpha", "A", "resonant"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    map: MapConfig
    psi: PsiSpec
    grids: GridSpec
    sphere_grid: int
    schedule: list[int]
    seed: int
    output: str
    raw: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.raw[name]


def parse_F(spec) -> FourierSeries:
    if isinstance(spec, dict):
        return FourierSeries(tuple(tuple(h) for h in spec.get("harmonics", [])), spec.get("c0", 0.0))
    text = str(spec).strip()
    if text == "sin":
        return FourierSeries.sine()
    if text == "cos":
        return FourierSeries.cosine()
    if text == "zero":
        return FourierSeries.zero()
    if text.startswith("const:"):
        return FourierSeries.constant(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown F {spec!r}; use sin, cos, zero, const:<c> or a harmonics mapping")


def parse_A(spec):
    if spec == "zero":
        return ZeroBump()
    if isinstance(spec, dict) and spec.get("zero"):
        return ZeroBump(int(spec.get("dim", 1)))
    if not isinstance(spec, dict):
        raise ValueError(f"A must be a mapping or 'zero', got {spec!r}")
    unknown = set(spec) - {"dim", "r_plateau", "r_support"}
    if unknown:
        raise ValueError(f"unknown key(s) in A: {sorted(unknown)}")
    return BumpProfile(int(spec.get("dim", 1)), float(spec.get("r_plateau", 0.3)),
                       float(spec.get("r_support", 0.6)))


def parse_schedule(spec) -> list[int]:
    if isinstance(spec, list):
        ns = [int(n) for n in spec]
    else:
        text = str(spec).strip()
        if text.startswith("dyadic:"):
            return dyadic_schedule(int(text.split(":", 1)[1]))
        if text.startswith("list:"):
            ns = [int(t) for t in text.split(":", 1)[1].split(",") if t.strip()]
        else:
            raise ValueError(f"schedule must be dyadic:<max> or list:<n1,...>, got {spec!r}")
    if not ns or min(ns) < 1:
        raise ValueError("schedule entries must be integers >= 1")
    return sorted(set(ns))


def _merge(defaults: dict, given: dict, where: str) -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if k not in defaults and not (where == "map" and k in _MAP_KEYS):
            raise ConfigError(f"unknown key: {where + '.' if where else ''}{k}")
        if isinstance(defaults.get(k), dict) and isinstance(v, dict) and k != "A":
            out[k] = _merge(defaults[k], v, f"{where + '.' if where else ''}{k}")
        else:
            out[k] = v
    return out


def _rule(rule: str, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        msg = str(exc)
        raise ConfigError(f"{rule}: {msg}" if not msg.startswith(f"{rule}:") else msg) from exc


def _map_config(m: dict, psi: PsiSpec) -> MapConfig:
    variant = m.get("variant", "chart")
    if variant not in VARIANTS:
        raise ConfigError(f"variant: must be one of {list(VARIANTS)}, got {variant!r}")
    A = _rule("bump radii", parse_A, m["A"])
    if "resonant" in m and m["resonant"] is not None:
        r = m["resonant"]
        if not isinstance(r, dict) or "depth" not in r:
            raise ConfigError("resonant: needs a mapping with 'depth'")
        F, alpha = _rule("resonant", resonant_pair, psi, int(r["depth"]), int(r.get("base", 8)))
    else:
        F = _rule("F", parse_F, m["F"])
        alpha = _rule("alpha", alpha_make, m["alpha"])
    return _rule("map", MapConfig, F, alpha, A, variant)


def build_config(data: dict | None) -> RunConfig:
    """Validate a parsed mapping and fill defaults."""
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError("top level: config must be a mapping")
    raw = _merge(DEFAULTS, data, "")
    if "resonant" in raw["map"] and ("F" in data.get("map", {}) or "alpha" in data.get("map", {})):
        raise ConfigError("resonant: F and alpha are derived from the resonant block; do not set them")
    if "resonant" in raw["map"]:
        raw["map"].pop("F")
        raw["map"].pop("alpha")
    psi = _rule("psi", PsiSpec.parse, raw["psi"])
    _rule("psi", psi_validate, psi, True)
    cfg = _map_config(raw["map"], psi)
    g = raw["grids"]
    grids = GridSpec(None if g["phi_grid"] is None else int(g["phi_grid"]), int(g["u_grid"]))
    _rule("grids", grids.phi_size, cfg)
    _rule("grids", grids.disc_points, cfg.dim)
    if int(g["sphere_grid"]) < 2:
        raise ConfigError("grids: sphere_grid must be >= 2")
    schedule = _rule("schedule", parse_schedule, raw["schedule"])
    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed: must be a non-negative integer, got {seed!r}")
    raw["psi"] = psi.to_dict()
    raw["map"] = {**raw["map"], "resolved": cfg.to_dict()}
    return RunConfig(cfg, psi, grids, int(g["sphere_grid"]), schedule, seed, str(raw["output"]), raw)


def parse_text(text: str, name: str = "<config>") -> dict:
    if name.endswith(".json"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"parse error in {name} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"parse error in {name}{where}: {problem}") from exc


def load_config(path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return build_config(parse_text(p.read_text(encoding="utf-8"), p.name))


def default_config() -> RunConfig:
    return build_config({})
