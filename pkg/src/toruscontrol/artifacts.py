"""Deterministic text artifacts: JSON and CSV with fixed float formatting.

Floats are written with 17 significant digits regardless of locale, keys
keep insertion order, and every file carries the SHA-256 of the config that
produced it.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from typing import Any, Iterable, Sequence

import numpy as np

from .torus import LinearOperator

FLOAT_FMT = ".17g"
HASH_KEY = "config_sha256"


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, FLOAT_FMT)
    # keep a float marker so integers and floats stay distinguishable on reload
    if all(c in "-0123456789" for c in s):
        s += ".0"
    return s


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return _emit(obj.tolist(), indent, level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no non-finite numbers
        return fmt_float(x) if math.isfinite(x) else json.dumps(fmt_float(x))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    return _emit(obj, indent, 0) + "\n"


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def matrix_record(A: np.ndarray) -> list:
    """Row-major ``[re, im]`` pairs."""
    A = np.asarray(A)
    return [[[float(np.real(z)), float(np.imag(z))] for z in row] for row in A]


def matrix_from_record(rows: Sequence) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix record must be rows of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def operator_record(op: LinearOperator, digest: str) -> dict:
    return {
        HASH_KEY: digest,
        "basis": {"m": op.basis.m, "n_max": op.basis.n_max, "margin": op.basis.margin},
        "matrix": matrix_record(op.matrix),
    }


def csv_text(header: Sequence[str], rows: Iterable[Sequence], digest: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {HASH_KEY}={digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_text(directory: str, name: str, text: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path
