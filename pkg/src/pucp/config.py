"""Experiment configuration: YAML documents checked against a JSON schema.

Calibrated constants are part of the configuration (inline, or a
relative path to a calibration file) and are never defaulted in code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import yaml

from .experiments import BRANCHES, Constant, branch_compatible

__all__ = ["SCHEMA_VERSION", "SCHEMA", "REQUIRED_CONSTANTS", "ConfigError", "ExperimentConfig",
           "load_config", "parse_config", "load_calibration"]

SCHEMA_VERSION = 1
REQUIRED_CONSTANTS = ("three_circle_C", "harnack_C", "trudinger_C", "caccioppoli_packaged_factor",
                      "theta_beta_floor")

_number_or_inf = {"oneOf": [{"type": "number"}, {"enum": ["inf"]}]}
_constant = {
    "type": "object",
    "required": ["value", "provenance"],
    "properties": {
        "value": {"type": "number"},
        "provenance": {"enum": ["paper_formula", "measured", "calibrated"]},
        "note": {"type": "string"},
    },
    "additionalProperties": False,
}

SCHEMA: dict = {
    "type": "object",
    "required": ["schema_version", "name", "variant", "p", "q", "branch", "grid", "problem",
                 "radii", "calibration"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "variant": {"enum": ["drift", "weighted"]},
        "p": {"type": "number", "exclusiveMinimum": 1},
        "q": _number_or_inf,
        "branch": {"enum": list(BRANCHES)},
        "grid": {
            "type": "object",
            "required": ["n"],
            "properties": {"n": {"type": "integer", "minimum": 32},
                           "domain_radius": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "problem": {
            "type": "object",
            "required": ["source"],
            "properties": {
                "source": {"enum": ["manufactured", "trig_weight", "files"]},
                "kind": {"type": "string"},
                "params": {"type": "object"},
                "solution": {"type": "string"},
                "coefficient": {"type": "string"},
                "boundary": {"type": "string"},
            },
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {"tol": {"type": "number", "exclusiveMinimum": 0},
                           "max_iter": {"type": "integer", "minimum": 1},
                           "epsilon": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
        "calibration": {"oneOf": [{"type": "string"},
                                  {"type": "object", "additionalProperties": _constant}]},
        "negative_control": {
            "type": "object",
            "properties": {"omega_inflation": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "normalize": {"type": "boolean"},
        "output": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Schema or case-split violation (CLI exit status 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    variant: str
    p: float
    q: float
    branch: str
    n: int
    domain_radius: float
    problem: dict
    radii: tuple
    calibration: dict
    solver_tol: float = 1e-8
    solver_max_iter: int = 500
    epsilon: float | None = 1e-4
    omega_inflation: float = 1.0
    normalize: bool = True
    output: str = "out"
    seed: int = 0
    base_dir: Path = field(default=Path("."), compare=False)

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def load_calibration(spec, base_dir: Path) -> dict:
    if isinstance(spec, str):
        path = spec if Path(spec).is_absolute() else base_dir / spec
        try:
            table = yaml.safe_load(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"calibration file unreadable: {exc}") from exc
        if isinstance(table, dict) and "calibration" in table:
            table = table["calibration"]
        try:
            jsonschema.validate(table, {"type": "object", "additionalProperties": _constant})
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"calibration file: {exc.message}") from exc
    else:
        table = spec
    missing = [k for k in REQUIRED_CONSTANTS if k not in table]
    if missing:
        raise ConfigError(f"calibration lacks {', '.join(missing)}")
    return {k: Constant(k, float(v["value"]), v["provenance"], v.get("note", "")) for k, v in table.items()}


def parse_config(doc: Any, base_dir: Path = Path(".")) -> ExperimentConfig:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    p = float(doc["p"])
    q = math.inf if doc["q"] == "inf" else float(doc["q"])
    why = branch_compatible(doc["branch"], p, q)
    if why:
        raise ConfigError(why)
    if doc["branch"].startswith("drift") != (doc["variant"] == "drift"):
        raise ConfigError(f"branch {doc['branch']} does not trace the {doc['variant']} equation")
    prob = doc["problem"]
    if prob["source"] == "manufactured" and "kind" not in prob:
        raise ConfigError("problem/kind is required for manufactured problems")
    if prob["source"] == "files" and "solution" not in prob and "boundary" not in prob:
        raise ConfigError("problem needs a solution or boundary field file")
    solver = doc.get("solver", {})
    return ExperimentConfig(
        name=doc["name"], variant=doc["variant"], p=p, q=q, branch=doc["branch"],
        n=int(doc["grid"]["n"]), domain_radius=float(doc["grid"].get("domain_radius", 8.0)),
        problem=dict(prob), radii=tuple(float(r) for r in doc["radii"]),
        calibration=load_calibration(doc["calibration"], base_dir),
        solver_tol=float(solver.get("tol", 1e-8)), solver_max_iter=int(solver.get("max_iter", 500)),
        epsilon=float(solver["epsilon"]) if "epsilon" in solver else 1e-4,
        omega_inflation=float(doc.get("negative_control", {}).get("omega_inflation", 1.0)),
        normalize=bool(doc.get("normalize", True)), output=doc.get("output", "out"),
        seed=int(doc.get("seed", 0)), base_dir=base_dir)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Read, override and validate a configuration.

    ``overrides`` keys: ``branch``, ``n`` (grid), ``tol`` (solver),
    ``seed``, ``output``; ``None`` values are ignored.
    """
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "n":
            doc.setdefault("grid", {})["n"] = value
        elif key == "tol":
            doc.setdefault("solver", {})["tol"] = value
        elif key in ("branch", "seed", "output"):
            doc[key] = value
        else:
            raise KeyError(f"unknown override {key!r}")
    return parse_config(doc, path.parent)
