"""Curves t -> xi(t) in parameter space, t in [0, 1].

Two kinds: piecewise-linear chains through nodes, and loops given by a
truncated real Fourier series of period 1. Either may carry a power-law
schedule ``t -> t**exponent`` produced by :func:`reparametrize`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, InvalidInputError

LOOP_TOL = 1e-12


@dataclass(frozen=True)
class ParameterPath:
    p: int
    exponent: float

    def _base(self, s: float, side: str) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def base_knots(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def knot_times(self) -> np.ndarray:
        """Knot times in the schedule parameter ``t`` (always contains 0 and 1)."""
        return self.base_knots() ** (1.0 / self.exponent)

    def to_record(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PiecewiseLinearPath(ParameterPath):
    nodes: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        times = np.array(self.times, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.p or nodes.shape[0] < 2:
            raise ConfigurationError(f"need at least two nodes of dimension p={self.p}", field="path.nodes")
        if times.shape != (nodes.shape[0],):
            raise ConfigurationError("one knot time per node required", field="path.times")
        if times[0] != 0.0 or times[-1] != 1.0 or np.any(np.diff(times) <= 0):
            raise ConfigurationError("knot times must increase strictly from 0 to 1", field="path.times")
        if not (np.all(np.isfinite(nodes)) and self.exponent >= 1.0):
            raise ConfigurationError("nodes must be finite and exponent >= 1", field="path")
        nodes.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "times", times)

    def base_knots(self) -> np.ndarray:
        return self.times

    def _base(self, s, side):
        j = int(np.searchsorted(self.times, s, side="right")) - 1
        if side == "left" and j > 0 and s == self.times[j]:
            j -= 1
        j = min(max(j, 0), len(self.times) - 2)
        dt = self.times[j + 1] - self.times[j]
        vel = (self.nodes[j + 1] - self.nodes[j]) / dt
        if s == self.times[j + 1]:
            pos = self.nodes[j + 1].copy()
        else:
            pos = self.nodes[j] + (s - self.times[j]) * vel
        return pos, vel

    def to_record(self) -> dict:
        return {
            "kind": "piecewise-linear",
            "p": self.p,
            "nodes": self.nodes.tolist(),
            "times": self.times.tolist(),
            "exponent": self.exponent,
        }


@dataclass(frozen=True)
class FourierLoop(ParameterPath):
    """``xi(s) = center + sum_k cos[k-1] cos(2 pi k s) + sin[k-1] sin(2 pi k s)``."""

    center: np.ndarray
    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self):
        center = np.array(self.center, dtype=float).reshape(self.p)
        cos = np.array(self.cos, dtype=float).reshape(-1, self.p)
        sin = np.array(self.sin, dtype=float).reshape(-1, self.p)
        if cos.shape != sin.shape:
            raise ConfigurationError("cosine and sine harmonics must have equal counts", field="path.harmonics")
        if not (np.all(np.isfinite(cos)) and np.all(np.isfinite(sin)) and self.exponent >= 1.0):
            raise ConfigurationError("harmonics must be finite and exponent >= 1", field="path")
        for a in (center, cos, sin):
            a.setflags(write=False)
        object.__setattr__(self, "_w", 2.0 * np.pi * np.arange(1, cos.shape[0] + 1))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "cos", cos)
        object.__setattr__(self, "sin", sin)

    @property
    def harmonics(self) -> int:
        return self.cos.shape[0]

    @classmethod
    def from_params(cls, params, K: int, p: int, center=None) -> "FourierLoop":
        """Loop from a flat vector ``[cos (K, p) row-major, sin (K, p) row-major]``."""
        params = np.asarray(params, dtype=float)
        if params.size != 2 * K * p:
            raise InvalidInputError(f"expected {2 * K * p} loop parameters, got {params.size}")
        center = np.zeros(p) if center is None else center
        return cls(p, 1.0, center, params[: K * p].reshape(K, p), params[K * p:].reshape(K, p))

    def params(self) -> np.ndarray:
        return np.concatenate([self.cos.ravel(), self.sin.ravel()])

    def _base(self, s, side):
        w = self._w
        # period-1 reduction makes xi(1) == xi(0) exactly
        ph = w * np.mod(s, 1.0)
        pos = self.center + np.cos(ph) @ self.cos + np.sin(ph) @ self.sin
        ph = w * s
        vel = (-w * np.sin(ph)) @ self.cos + (w * np.cos(ph)) @ self.sin
        return pos, vel

    def to_record(self) -> dict:
        return {
            "kind": "fourier-loop",
            "p": self.p,
            "center": self.center.tolist(),
            "harmonics": [
                {"k": k + 1, "cos": self.cos[k].tolist(), "sin": self.sin[k].tolist()}
                for k in range(self.harmonics)
            ],
            "exponent": self.exponent,
        }


def line(start, end) -> PiecewiseLinearPath:
    start = np.atleast_1d(np.asarray(start, dtype=float))
    end = np.atleast_1d(np.asarray(end, dtype=float))
    return PiecewiseLinearPath(start.size, 1.0, np.stack([start, end]), np.array([0.0, 1.0]))


def polyline(nodes, times=None) -> PiecewiseLinearPath:
    nodes = np.asarray(nodes, dtype=float)
    if times is None:
        times = np.linspace(0.0, 1.0, nodes.shape[0])
    return PiecewiseLinearPath(nodes.shape[1], 1.0, nodes, np.asarray(times, dtype=float))


def circle(center, radius: float, axes=(0, 1), p: int | None = None) -> FourierLoop:
    """Circle of ``radius`` in the plane of two parameter axes, started at angle 0."""
    center = np.asarray(center, dtype=float)
    p = center.size if p is None else p
    cos = np.zeros((1, p))
    sin = np.zeros((1, p))
    cos[0, axes[0]] = radius
    sin[0, axes[1]] = radius
    return FourierLoop(p, 1.0, center, cos, sin)


def eval_path(path: ParameterPath, t: float, side: str = "right") -> tuple[np.ndarray, np.ndarray]:
    """Position and velocity at schedule time ``t``.

    At a knot of a piecewise-linear chain, ``side`` selects the one-sided
    velocity; the right one is the default.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise InvalidInputError(f"t={t} outside [0, 1]")
    e = path.exponent
    s = t**e
    ds = e * t ** (e - 1.0) if e != 1.0 else 1.0
    if e != 1.0:
        # t**e can miss a knot by an ulp; land exactly on it so the side is honoured
        knots = path.base_knots()
        j = int(np.argmin(np.abs(knots - s)))
        if abs(knots[j] - s) <= 1e-13:
            s = float(knots[j])
    pos, vel = path._base(s, side)
    return pos, vel * ds


def reparametrize(path: ParameterPath, exponent: float) -> ParameterPath:
    """Same image, traversed on the schedule ``t -> t**exponent``."""
    if not exponent >= 1.0:
        raise InvalidInputError(f"exponent must be >= 1, got {exponent}")
    return replace(path, exponent=path.exponent * exponent)


def is_loop(path: ParameterPath) -> bool:
    a, _ = eval_path(path, 0.0)
    b, _ = eval_path(path, 1.0)
    return bool(np.max(np.abs(b - a), initial=0.0) < LOOP_TOL)


def time_grid(path: ParameterPath, steps: int) -> np.ndarray:
    """Step boundaries on [0, 1] with every knot of the path as a boundary.

    Steps are shared out over the segments in proportion to their duration,
    at least one per segment.
    """
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    knots = path.knot_times()
    pieces = []
    for a, b in zip(knots[:-1], knots[1:]):
        n = max(1, int(round(steps * (b - a))))
        pieces.append(np.linspace(a, b, n + 1)[:-1])
    pieces.append([1.0])
    return np.concatenate(pieces)


def path_from_record(record: Mapping) -> ParameterPath:
    kind = record.get("kind")
    p = int(record["p"])
    exponent = float(record.get("exponent", 1.0))
    if kind == "piecewise-linear":
        nodes = np.asarray(record["nodes"], dtype=float)
        times = record.get("times")
        times = np.linspace(0.0, 1.0, nodes.shape[0]) if times is None else np.asarray(times, dtype=float)
        return PiecewiseLinearPath(p, exponent, nodes, times)
    if kind == "fourier-loop":
        harmonics = sorted(record.get("harmonics", []), key=lambda h: int(h["k"]))
        K = max((int(h["k"]) for h in harmonics), default=0)
        cos = np.zeros((K, p))
        sin = np.zeros((K, p))
        for h in harmonics:
            cos[int(h["k"]) - 1] = h.get("cos", [0.0] * p)
            sin[int(h["k"]) - 1] = h.get("sin", [0.0] * p)
        center = record.get("center", [0.0] * p)
        return FourierLoop(p, exponent, center, cos, sin)
    raise ConfigurationError(f"unknown path kind {kind!r}", field="path.kind")
