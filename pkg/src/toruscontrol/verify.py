"""Invariant suite run by ``toruscontrol verify``.

Each check computes one scalar and compares it with a tolerance. Checks are
independent: an exception inside one check marks it failed and the suite
moves on.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .classical import action_transport, angle_mode_evolution, integrate_direct
from .config import RunConfig
from .connection import ControlConnection
from .path import eval_path, polyline, reparametrize
from .quantization import (
    AffineObservable,
    QuantizationScheme,
    action_operator,
    dirac_residual,
    gauge_conjugate,
    gauge_overlap,
    hamiltonian_operator,
    hamiltonian_spectrum,
    quantize,
    quantize_affine,
    twist_reduce,
)
from .quantum import (
    build_delta,
    dynamic_factor,
    eigenspace_blocks,
    full_evolution,
    holonomy_operator,
    schrodinger_evolve,
)
from .synthesis import SynthesisProblem, synthesize_loop
from .torus import ActionAngleState, FourierSeries, StateVector, TruncatedBasis

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (tol {self.tol:.1e}){' ' + self.detail if self.detail else ''}"


def random_real_series(rng: np.random.Generator, m: int, support: int, scale: float = 1.0) -> FourierSeries:
    """Real Fourier series with independent normal coefficients on ``|n|_inf <= support``."""
    coeffs: dict[tuple, complex] = {}
    for mode in itertools.product(range(-support, support + 1), repeat=m):
        if mode in coeffs:
            continue
        neg = tuple(-v for v in mode)
        if mode == neg:
            coeffs[mode] = complex(scale * rng.standard_normal())
        else:
            c = scale * complex(rng.standard_normal(), rng.standard_normal()) / np.sqrt(2)
            coeffs[mode] = c
            coeffs[neg] = c.conjugate()
    return FourierSeries(m, coeffs, is_real=True)


def random_affine(rng: np.random.Generator, m: int, support: int) -> AffineObservable:
    return AffineObservable(
        tuple(random_real_series(rng, m, support) for _ in range(m)), random_real_series(rng, m, support)
    )


def _interior_hermiticity(A: np.ndarray, basis: TruncatedBasis) -> float:
    idx = basis.interior()
    B = A[np.ix_(idx, idx)]
    return float(np.linalg.norm(B - B.conj().T, 2))


def frozen_component(conn: ControlConnection, sigma, a: int, beta: int) -> FourierSeries:
    """``Lambda^a_beta(sigma, .)`` as a real series."""
    return conn.series(a, beta, sigma)


def _checks(cfg: RunConfig) -> list[tuple[str, float, Callable[[], float]]]:
    scheme, basis, conn, path = cfg.scheme, cfg.basis, cfg.conn, cfg.path
    steps = cfg.run["steps"]
    seed = cfg.run["seed"]
    H = cfg.hamiltonian
    m = cfg.m

    def spectrum_operator():
        E = hamiltonian_spectrum(scheme, basis, H)
        D = hamiltonian_operator(scheme, basis, H).matrix
        off = D - np.diag(np.diag(D))
        return float(max(np.max(np.abs(np.diag(D) - E)), np.max(np.abs(off), initial=0.0)))

    def twist_equivalence():
        twisted = QuantizationScheme(scheme.lam, np.full(m, 0.5))
        reduced = twist_reduce(twisted)
        return float(
            max(
                np.max(np.abs(action_operator(twisted, basis, k).matrix - action_operator(reduced, basis, k).matrix))
                for k in range(m)
            )
        )

    def gauge_conjugacy():
        worst = 0.0
        for k in range(m):
            d = np.zeros(m, dtype=int)
            d[k] = 1
            shifted, W = gauge_conjugate(scheme, basis, d)
            idx = gauge_overlap(basis, d)
            for j in range(m):
                lhs = (W.matrix.conj().T @ action_operator(scheme, basis, j).matrix @ W.matrix)[np.ix_(idx, idx)]
                rhs = action_operator(shifted, basis, j).matrix[np.ix_(idx, idx)]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        return worst

    qbasis = TruncatedBasis(m, 6, 2)
    rng = np.random.default_rng(seed)
    pairs = [(random_affine(rng, m, 1), random_affine(rng, m, 1)) for _ in range(10)]

    def dirac():
        return max(dirac_residual(scheme, qbasis, f, g) for f, g in pairs)

    def hermiticity():
        return max(_interior_hermiticity(quantize(scheme, qbasis, f).matrix, qbasis) for pair in pairs for f in pair)

    sigma0, _ = eval_path(path, 0.0)

    def delta_consistency():
        worst = 0.0
        for beta, D in enumerate(build_delta(conn, scheme, sigma0, basis)):
            a = [frozen_component(conn, sigma0, k, beta) for k in range(m)]
            A = quantize_affine(scheme, basis, a, FourierSeries.zero(m)).matrix
            worst = max(worst, float(np.max(np.abs(D.matrix - A))))
        return worst

    def classical_transport():
        traj = integrate_direct(cfg.state0, conn, path, H, steps=steps)
        U = action_transport(conn, path, traj, steps)
        return float(np.max(np.abs(U @ cfg.state0.I - traj.final.I)))

    def classical_reparam():
        # only the control part is schedule-independent; the drift depends on elapsed time
        a = integrate_direct(cfg.state0, conn, path, steps=steps).final
        b = integrate_direct(cfg.state0, conn, reparametrize(path, 3.0), steps=steps).final
        dphi = np.angle(np.exp(1j * (a.phi - b.phi)))
        return float(max(np.max(np.abs(a.I - b.I)), np.max(np.abs(dphi))))

    def characteristics():
        # the untouched axes factor out exactly, so the box only spans the touched ones
        axes = conn.touched_axes() or [0]
        sub = conn.restrict(axes)
        mbasis = TruncatedBasis(len(axes), 24 if len(axes) == 1 else 6, max(1, sub.support()))
        U = angle_mode_evolution(sub, path, mbasis, steps, method="magnus4").matrix
        rng_c = np.random.default_rng(seed + 1)
        worst = 0.0
        for _ in range(3):
            phi0 = rng_c.uniform(0, 2 * np.pi, m)
            traj = integrate_direct(ActionAngleState(np.ones(m), phi0), conn, path, steps=steps)
            psi1 = U @ np.exp(1j * (mbasis.indices @ phi0[axes]))
            for k in range(len(axes)):
                n = np.zeros(len(axes), dtype=int)
                n[k] = 1
                psi_n = np.exp(1j * traj.final.phi[axes[k]])
                worst = max(worst, abs(psi1[mbasis.index_of(n)] - psi_n))
        return float(worst)

    hol = {}

    def holonomy():
        if "res" not in hol:
            hol["res"] = holonomy_operator(conn, scheme, path, basis, steps)
        return hol["res"]

    def unitarity():
        return holonomy().unitarity_residual

    def block_leakage():
        return eigenspace_blocks(scheme, basis, holonomy().U).leakage

    def reparam_quantum():
        a = holonomy_operator(conn, scheme, path, basis, steps, method="magnus4").U.matrix
        b = holonomy_operator(conn, scheme, reparametrize(path, 3.0), basis, steps, method="magnus4").U.matrix
        return float(np.linalg.norm(a - b, 2))

    def retrace():
        s = np.array([eval_path(path, t)[0] for t in (0.0, 0.5)])
        out_back = polyline([s[0], s[1], s[0]])
        U = holonomy_operator(conn, scheme, out_back, basis, steps).U.matrix
        return float(np.linalg.norm(U - np.eye(basis.size), 2))

    def factorization():
        t = cfg.run["t"]
        Uf = full_evolution(conn, scheme, path, basis, steps, t).matrix
        prod = dynamic_factor(scheme, basis, t).matrix @ holonomy().U.matrix
        idx = basis.interior()
        return float(np.linalg.norm((Uf - prod)[np.ix_(idx, idx)], 2))

    def schrodinger():
        t = cfg.run["t"]
        E = hamiltonian_spectrum(scheme, basis, H)
        worst = 0.0
        for j in range(basis.size):
            psi = schrodinger_evolve(scheme, basis, H, StateVector(basis, np.eye(basis.size)[j]), t)
            worst = max(worst, abs(psi.coeff[j] - np.exp(-1j * E[j] * t)))
        rng_s = np.random.default_rng(seed + 2)
        c = rng_s.standard_normal(basis.size) + 1j * rng_s.standard_normal(basis.size)
        c /= np.linalg.norm(c)
        psi = schrodinger_evolve(scheme, basis, H, StateVector(basis, c), t)
        return float(max(worst, abs(np.linalg.norm(psi.coeff) - 1.0)))

    def synthesis_identity():
        prob = SynthesisProblem(
            np.eye(int(np.sum(basis.indices[:, 0] == 0))), conn, scheme, basis, K=1, budget=50, seed=seed, steps=50
        )
        res = synthesize_loop(prob)
        return res.residual if res.evaluations <= 50 else np.inf

    checks = [
        ("spectrum/operator agreement", 1e-12, spectrum_operator),
        ("twist equivalence", 0.0, twist_equivalence),
        ("gauge conjugacy", 1e-12, gauge_conjugacy),
        ("Dirac condition", 1e-10, dirac),
        ("Hermiticity of quantized observables", 1e-12, hermiticity),
        ("Delta vs quantized connection", 1e-12, delta_consistency),
        ("classical transport vs direct", 1e-6, classical_transport),
        ("classical reparametrization", 1e-8, classical_reparam),
        ("angle modes vs characteristics", 1e-6, characteristics),
        ("holonomy unitarity", 1e-8, unitarity),
        ("holonomy block leakage", 1e-10, block_leakage),
        ("holonomy reparametrization", 1e-8, reparam_quantum),
        ("retraced path is identity", 1e-10, retrace),
        ("factorization U_full = U_1 U_2", 1e-8, factorization),
        ("Schrodinger phases and norm", 1e-14, schrodinger),
        ("synthesis of identity target", 1e-8, synthesis_identity),
    ]
    return checks


def run_suite(cfg: RunConfig) -> list[CheckResult]:
    results = []
    for name, tol, fn in _checks(cfg):
        try:
            value = float(fn())
            passed = bool(np.isfinite(value) and value <= tol)
            results.append(CheckResult(name, value, tol, passed))
        except Exception as exc:  # a crashing check is a failed check
            log.exception("check %r raised", name)
            results.append(CheckResult(name, float("nan"), tol, False, f"{type(exc).__name__}: {exc}"))
    return results
