"""Run configuration: JSON documents checked against a strict schema.

All quantities are dimensionless with hbar = 1. Axis and component indices
are 0-based throughout.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import numpy as np
from jsonschema import Draft202012Validator

from .artifacts import config_hash
from .connection import ControlConnection
from .errors import ConfigurationError, InvalidInputError
from .path import ParameterPath, path_from_record
from .polynomial import HamiltonianPoly, Polynomial
from .quantization import QuantizationScheme
from .torus import ActionAngleState, TruncatedBasis

COMMANDS = ("spectrum", "evolve-classical", "evolve-quantum", "holonomy", "synthesize", "verify")

_num = {"type": "number"}
_int = {"type": "integer"}
_vec = {"type": "array", "items": _num}
_ivec = {"type": "array", "items": _int}
_poly = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {"powers": _ivec, "coeff": _num, "coeff_im": _num},
        "required": ["powers", "coeff"],
        "additionalProperties": False,
    },
}

SCHEMA = {
    "type": "object",
    "properties": {
        "units": {"type": "string"},
        "description": {"type": "string"},
        "system": {
            "type": "object",
            "properties": {
                "m": {"type": "integer", "minimum": 1},
                "p": {"type": "integer", "minimum": 1},
                "n_max": {"type": "integer", "minimum": 0},
                "margin": {"type": "integer", "minimum": 0},
                "lambda": _vec,
                "twist": {"type": "array", "items": {"enum": [0, 0.5]}},
            },
            "required": ["m", "p", "n_max"],
            "additionalProperties": False,
        },
        "hamiltonian": {
            "type": "object",
            "properties": {"terms": _poly},
            "required": ["terms"],
            "additionalProperties": False,
        },
        "connection": {
            "type": "object",
            "properties": {
                "m": _int,
                "p": _int,
                "reality": {"enum": ["symmetrize", "reject"]},
                "terms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "i": {"type": "integer", "minimum": 0},
                            "alpha": {"type": "integer", "minimum": 0},
                            "mode": _ivec,
                            "poly": _poly,
                        },
                        "required": ["i", "alpha", "mode", "poly"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["terms"],
            "additionalProperties": False,
        },
        "path": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["piecewise-linear", "fourier-loop"]},
                "p": _int,
                "nodes": {"type": "array", "items": _vec, "minItems": 2},
                "times": _vec,
                "center": _vec,
                "harmonics": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"k": {"type": "integer", "minimum": 1}, "cos": _vec, "sin": _vec},
                        "required": ["k"],
                        "additionalProperties": False,
                    },
                },
                "exponent": {"type": "number", "minimum": 1},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "initial_state": {
            "type": "object",
            "properties": {"I": _vec, "phi": _vec},
            "required": ["I", "phi"],
            "additionalProperties": False,
        },
        "run": {
            "type": "object",
            "properties": {
                "command": {"enum": list(COMMANDS)},
                "steps": {"type": "integer", "minimum": 1},
                "t": _num,
                "seed": {"type": "integer", "minimum": 0},
                "out": {"type": "string"},
                "method": {"enum": ["midpoint", "magnus4"]},
                "format": {"enum": ["csv", "json"]},
            },
            "additionalProperties": False,
        },
        "synthesis": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["quantum", "classical"]},
                "K": {"type": "integer", "minimum": 1},
                "budget": {"type": "integer", "minimum": 1},
                "restarts": {"type": "integer", "minimum": 1},
                "n1": _int,
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 1},
                "center": _vec,
                "init_scale": {"type": "number", "exclusiveMinimum": 0},
                "method": {"enum": ["midpoint", "magnus4"]},
                "target": {
                    "type": "object",
                    "properties": {
                        "kind": {"enum": ["identity", "planted", "matrix"]},
                        "seed": {"type": "integer", "minimum": 0},
                        "scale": {"type": "number", "exclusiveMinimum": 0},
                        "re": {"type": "array", "items": _vec},
                        "im": {"type": "array", "items": _vec},
                    },
                    "required": ["kind"],
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
    },
    "required": ["system", "connection", "path"],
    "additionalProperties": False,
}

RUN_DEFAULTS = {"steps": 1000, "t": 1.0, "seed": 0, "out": "out", "method": "midpoint", "format": "csv"}
SYNTHESIS_DEFAULTS = {
    "kind": "quantum",
    "K": 1,
    "budget": 5000,
    "restarts": 8,
    "n1": 0,
    "tol": 1e-8,
    "steps": 200,
    "init_scale": 0.5,
    "method": "midpoint",
    "target": {"kind": "identity"},
}

_validator = Draft202012Validator(SCHEMA)


def _field(path) -> str:
    return ".".join(str(p) for p in path) or "<root>"


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration with the engine objects built from it."""

    raw: dict
    scheme: QuantizationScheme
    basis: TruncatedBasis
    hamiltonian: HamiltonianPoly
    conn: ControlConnection
    path: ParameterPath
    state0: ActionAngleState
    run: dict
    synthesis: dict

    @property
    def m(self) -> int:
        return self.basis.m

    @property
    def p(self) -> int:
        return self.conn.p

    @property
    def digest(self) -> str:
        """Config hash; the output directory does not change any result, so it is left out."""
        doc = copy.deepcopy(self.raw)
        doc["run"].pop("out", None)
        return config_hash(doc)


def _poly_records(records, nvars: int, where: str) -> Polynomial:
    for j, rec in enumerate(records):
        if len(rec["powers"]) != nvars:
            raise ConfigurationError(f"exponent tuple needs {nvars} entries", field=f"{where}.{j}.powers")
    return Polynomial.from_records(records, nvars)


def build_config(doc: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Validate ``doc`` (plus ``run`` overrides) and build the engine objects."""
    doc = copy.deepcopy(dict(doc))
    errors = sorted(_validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ConfigurationError(err.message, field=_field(err.absolute_path))

    run = dict(RUN_DEFAULTS)
    run.update(doc.get("run", {}))
    for k, v in (overrides or {}).items():
        if v is not None:
            run[k] = v
    doc["run"] = run
    if "synthesis" in doc:
        syn = copy.deepcopy(SYNTHESIS_DEFAULTS)
        syn.update(doc["synthesis"])
        doc["synthesis"] = syn
    errors = list(_validator.iter_errors(doc))
    if errors:
        raise ConfigurationError(errors[0].message, field=_field(errors[0].absolute_path))

    system = doc["system"]
    m, p, n_max = system["m"], system["p"], system["n_max"]
    margin = system.get("margin", 0)
    if margin > n_max:
        raise ConfigurationError(f"margin {margin} exceeds n_max {n_max}", field="system.margin")
    lam = system.get("lambda", [0.0] * m)
    twist = system.get("twist", [0.0] * m)
    if len(lam) != m:
        raise ConfigurationError(f"need {m} entries", field="system.lambda")
    if len(twist) != m:
        raise ConfigurationError(f"need {m} entries", field="system.twist")
    scheme = QuantizationScheme(lam, twist)
    basis = TruncatedBasis(m, n_max, margin)

    H = HamiltonianPoly(_poly_records(doc.get("hamiltonian", {"terms": []})["terms"], m, "hamiltonian.terms"))

    crec = doc["connection"]
    for key, want in (("m", m), ("p", p)):
        if key in crec and crec[key] != want:
            raise ConfigurationError(f"connection has {key}={crec[key]}, system has {want}", field=f"connection.{key}")
    for j, t in enumerate(crec["terms"]):
        if t["i"] >= m:
            raise ConfigurationError(f"fibre index {t['i']} out of range for m={m}", field=f"connection.terms.{j}.i")
        if t["alpha"] >= p:
            raise ConfigurationError(f"parameter index {t['alpha']} out of range for p={p}", field=f"connection.terms.{j}.alpha")
        if len(t["mode"]) != m:
            raise ConfigurationError(f"mode needs {m} entries", field=f"connection.terms.{j}.mode")
        for k, rec in enumerate(t["poly"]):
            if len(rec["powers"]) != p:
                raise ConfigurationError(f"exponent tuple needs {p} entries", field=f"connection.terms.{j}.poly.{k}.powers")
    try:
        conn = ControlConnection.from_record({**crec, "m": m, "p": p}, reality=crec.get("reality", "symmetrize"))
    except InvalidInputError as exc:
        raise ConfigurationError(str(exc), field="connection.terms") from exc

    prec = dict(doc["path"])
    if prec.get("p", p) != p:
        raise ConfigurationError(f"path has p={prec['p']}, system has {p}", field="path.p")
    prec["p"] = p
    if prec["kind"] == "piecewise-linear":
        if "nodes" not in prec:
            raise ConfigurationError("piecewise-linear path needs nodes", field="path.nodes")
        for j, node in enumerate(prec["nodes"]):
            if len(node) != p:
                raise ConfigurationError(f"node needs {p} entries", field=f"path.nodes.{j}")
    else:
        if len(prec.get("center", [0.0] * p)) != p:
            raise ConfigurationError(f"center needs {p} entries", field="path.center")
        for j, h in enumerate(prec.get("harmonics", [])):
            for key in ("cos", "sin"):
                if key in h and len(h[key]) != p:
                    raise ConfigurationError(f"needs {p} entries", field=f"path.harmonics.{j}.{key}")
    path = path_from_record(prec)

    st = doc.get("initial_state", {"I": [1.0] * m, "phi": [0.0] * m})
    for key in ("I", "phi"):
        if len(st[key]) != m:
            raise ConfigurationError(f"need {m} entries", field=f"initial_state.{key}")
    state0 = ActionAngleState(st["I"], st["phi"])

    syn = doc.get("synthesis", copy.deepcopy(SYNTHESIS_DEFAULTS))
    if "center" in syn and len(syn["center"]) != p:
        raise ConfigurationError(f"center needs {p} entries", field="synthesis.center")
    return RunConfig(doc, scheme, basis, H, conn, path, state0, run, syn)


def load_config(source, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Load a config from a file path or an already-parsed mapping."""
    if isinstance(source, Mapping):
        return build_config(source, overrides)
    source = os.fspath(source)
    try:
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc.strerror}", field="<file>") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON at line {exc.lineno}: {exc.msg}", field="<file>") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a JSON object", field="<root>")
    return build_config(doc, overrides)


def bundled_config_path(name: str = "default") -> str:
    here = os.path.join(os.path.dirname(__file__), "data", f"{name}.json")
    if not os.path.exists(here):
        raise ConfigurationError(f"no bundled config named {name!r}", field="<file>")
    return here


def target_matrix(cfg: RunConfig, block_dim: int) -> np.ndarray:
    """Resolve ``synthesis.target`` to a matrix (planted targets are computed lazily by the caller)."""
    tgt = cfg.synthesis["target"]
    if tgt["kind"] == "identity":
        return np.eye(block_dim)
    if tgt["kind"] == "matrix":
        if "re" not in tgt:
            raise ConfigurationError("matrix target needs 're'", field="synthesis.target.re")
        re = np.asarray(tgt["re"], dtype=float)
        im = np.asarray(tgt.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (block_dim, block_dim) or im.shape != re.shape:
            raise ConfigurationError(f"target must be {block_dim}x{block_dim}", field="synthesis.target")
        return re + 1j * im
    raise ConfigurationError("planted targets are resolved by the runner", field="synthesis.target.kind")
