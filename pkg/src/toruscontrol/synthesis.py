"""Search for control loops whose holonomy matches a target.

Loops are Fourier loops with ``K`` harmonics per parameter axis; the search
runs Nelder-Mead from a zero-amplitude start followed by seeded random
restarts, all sharing one evaluation budget.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .classical import action_transport, integrate_direct
from .connection import ControlConnection
from .errors import ConfigurationError, DivergenceError, InvalidInputError
from .path import FourierLoop, ParameterPath
from .ordered import METHODS
from .quantization import QuantizationScheme
from .quantum import block_positions, delta_block_terms, holonomy_block
from .torus import ActionAngleState, TruncatedBasis

log = logging.getLogger(__name__)

PENALTY = 1e6
KINDS = ("quantum", "classical")


@dataclass(frozen=True)
class SynthesisProblem:
    """Target holonomy plus the search space.

    ``kind="quantum"`` compares the ``n_1`` eigenspace block of the holonomy
    operator; ``kind="classical"`` compares the action-transport matrix
    along the trajectory started at angles ``phi0``.
    """

    target: np.ndarray
    conn: ControlConnection
    scheme: Optional[QuantizationScheme]
    basis: Optional[TruncatedBasis]
    K: int = 1
    budget: int = 5000
    seed: int = 0
    steps: int = 200
    kind: str = "quantum"
    n1: int = 0
    center: Optional[np.ndarray] = None
    phi0: Optional[np.ndarray] = None
    restarts: int = 8
    tol: float = 1e-8
    init_scale: float = 0.5
    method: str = "midpoint"
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown synthesis kind {self.kind!r}", field="synthesis.kind")
        if self.K < 1:
            raise ConfigurationError("need K >= 1", field="synthesis.K")
        if self.budget < 1:
            raise ConfigurationError("need budget >= 1", field="synthesis.budget")
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown ordering method {self.method!r}", field="synthesis.method")
        if self.restarts < 1:
            raise ConfigurationError("need at least one restart", field="synthesis.restarts")
        target = np.array(self.target, dtype=complex if self.kind == "quantum" else float)
        if target.ndim != 2 or target.shape[0] != target.shape[1]:
            raise ConfigurationError("target must be a square matrix", field="synthesis.target")
        if self.kind == "quantum":
            if self.scheme is None or self.basis is None:
                raise ConfigurationError("quantum synthesis needs a scheme and a basis")
            dim = block_positions(self.scheme, self.basis, self.n1).size
        else:
            dim = self.conn.m
        if target.shape[0] != dim:
            raise ConfigurationError(
                f"target is {target.shape[0]}x{target.shape[0]}, block has dimension {dim}",
                field="synthesis.target",
            )
        center = np.zeros(self.conn.p) if self.center is None else np.asarray(self.center, dtype=float)
        if center.shape != (self.conn.p,):
            raise ConfigurationError(f"center must have p={self.conn.p} entries", field="synthesis.center")
        phi0 = np.zeros(self.conn.m) if self.phi0 is None else np.asarray(self.phi0, dtype=float)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "phi0", phi0)

    @property
    def dim(self) -> int:
        return self.target.shape[0]

    @property
    def n_params(self) -> int:
        return 2 * self.K * self.conn.p

    def loop(self, params) -> FourierLoop:
        return FourierLoop.from_params(params, self.K, self.conn.p, self.center)

    def realize(self, loop: ParameterPath) -> np.ndarray:
        """Holonomy of ``loop`` on the compared block."""
        if self.kind == "quantum":
            if "terms" not in self._cache:
                self._cache["terms"] = delta_block_terms(self.conn, self.scheme, self.basis, self.n1)
            return holonomy_block(
                self.conn, self.scheme, loop, self.basis, self.steps, self.n1, self.method, terms=self._cache["terms"]
            )
        state0 = ActionAngleState(np.ones(self.conn.m), self.phi0)
        traj = integrate_direct(state0, self.conn, loop, steps=self.steps)
        return action_transport(self.conn, loop, traj, self.steps, self.method)


@dataclass(frozen=True)
class SynthesisResult:
    path: FourierLoop
    residual: float
    evaluations: int
    converged: bool
    history: np.ndarray
    restart: int

    def summary(self) -> dict:
        return {
            "residual": self.residual,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "restart": self.restart,
        }


def path_objective(problem: SynthesisProblem, path: ParameterPath) -> float:
    """``||U(path) - target||_F / dim``; non-finite values map to a large penalty."""
    try:
        U = problem.realize(path)
        val = float(np.linalg.norm(U - problem.target) / problem.dim)
    except (DivergenceError, FloatingPointError) as exc:
        log.warning("objective evaluation failed: %s", exc)
        return PENALTY
    if not np.isfinite(val):
        log.warning("non-finite objective for path %s", path.to_record())
        return PENALTY
    return val


def holonomy_objective(problem: SynthesisProblem, params) -> float:
    """Objective at the loop with harmonic coefficients ``params`` (length ``2 K p``)."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != problem.n_params:
        raise InvalidInputError(f"expected {problem.n_params} loop parameters, got {params.size}")
    return path_objective(problem, problem.loop(params))


def unitary_distance(target: np.ndarray) -> float:
    """Normalized Frobenius distance from ``target`` to the nearest unitary.

    The nearest unitary is the polar factor, so the distance is
    ``||s - 1||_2`` over the singular values ``s``.
    """
    target = np.asarray(target)
    s = np.linalg.svd(target, compute_uv=False)
    return float(np.linalg.norm(s - 1.0) / target.shape[0])


class _Converged(Exception):
    pass


class _BudgetExhausted(Exception):
    pass


def synthesize_loop(problem: SynthesisProblem) -> SynthesisResult:
    """Seeded multi-start Nelder-Mead over the loop harmonics.

    Restart 0 starts at zero amplitude, the rest at normal draws of width
    ``init_scale``; each gets an equal share of the remaining budget. Any
    budget left after the restarts polishes the best point. The search
    stops as soon as a residual ``<= tol`` is seen.
    """
    rng = np.random.default_rng(problem.seed)
    n = problem.n_params
    starts = [np.zeros(n)] + [problem.init_scale * rng.standard_normal(n) for _ in range(problem.restarts - 1)]

    best = {"x": starts[0], "f": np.inf, "restart": 0}
    history: list[float] = []
    state = {"restart": 0}

    def f(x):
        if len(history) >= problem.budget:
            raise _BudgetExhausted
        val = holonomy_objective(problem, x)
        # strict improvement only, so ties keep the earlier restart
        if val < best["f"]:
            best.update(x=np.array(x, dtype=float), f=val, restart=state["restart"])
        history.append(best["f"])
        if best["f"] <= problem.tol:
            raise _Converged
        return val

    def run(x0, budget, step):
        simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(n)])
        try:
            minimize(
                f,
                x0,
                method="Nelder-Mead",
                options={
                    "maxfev": budget,
                    "initial_simplex": simplex,
                    "xatol": 1e-12,
                    "fatol": 1e-14,
                    "adaptive": n > 4,
                },
            )
        except _BudgetExhausted:
            pass

    try:
        for r, x0 in enumerate(starts):
            state["restart"] = r
            remaining = problem.budget - len(history)
            if remaining <= 0:
                break
            run(x0, remaining // (problem.restarts - r) or remaining, problem.init_scale / 2)
        step = problem.init_scale / 8
        while len(history) < problem.budget:
            state["restart"] = problem.restarts
            before = (len(history), best["f"])
            run(best["x"], problem.budget - len(history), step)
            if (len(history), best["f"]) == before:
                break
            if best["f"] == before[1]:
                step /= 4
                if step < 1e-10:
                    break
    except _Converged:
        pass

    return SynthesisResult(
        path=problem.loop(best["x"]),
        residual=float(best["f"]),
        evaluations=len(history),
        converged=bool(best["f"] <= problem.tol),
        history=np.array(history),
        restart=int(best["restart"]),
    )


def plant_loop(K: int, p: int, seed: int, scale: float = 0.5, center=None) -> FourierLoop:
    """Random Fourier loop used as a planted solution."""
    rng = np.random.default_rng(seed)
    return FourierLoop.from_params(scale * rng.standard_normal(2 * K * p), K, p, center)
