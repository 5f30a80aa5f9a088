"""Quantum control: the perturbation operators, dynamic factor and holonomy.

The built-in Hamiltonian is the first action operator. The perturbation
only involves the remaining axes, so it commutes with the Hamiltonian and
the evolution splits into a dynamic phase and a holonomy factor that acts
inside each eigenspace of the first action.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .connection import ControlConnection
from .errors import ConfigurationError, InvalidInputError
from .ordered import path_ordered_exp
from .path import ParameterPath, eval_path, is_loop
from .polynomial import HamiltonianPoly
from .quantization import QuantizationScheme, action_operator, action_values, hamiltonian_spectrum
from .torus import LinearOperator, StateVector, TruncatedBasis, shift_pairs

DEGENERACY_TOL = 1e-9


def _check_inputs(conn: ControlConnection, scheme: QuantizationScheme, basis: TruncatedBasis):
    if not (conn.m == scheme.m == basis.m):
        raise InvalidInputError(f"dimension mismatch: connection m={conn.m}, scheme m={scheme.m}, basis m={basis.m}")
    if conn.touches_axis(0):
        raise ConfigurationError("the control connection must not involve the first action/angle axis")
    if conn.support() > basis.margin:
        raise ConfigurationError(f"connection support {conn.support()} exceeds basis margin {basis.margin}")


def build_delta(
    conn: ControlConnection, scheme: QuantizationScheme, sigma, basis: TruncatedBasis
) -> list[LinearOperator]:
    """Perturbation generators, one per parameter axis.

    Entry ``[n, k]`` of generator ``beta`` is
    ``sum_a (k_a + m_a / 2 - lambda_a) Lambda^a_{beta, m}(sigma)`` with
    ``m = n - k``; it vanishes unless ``n_1 = k_1``.
    """
    _check_inputs(conn, scheme, basis)
    lam = scheme.effective_lambda
    out = [np.zeros((basis.size, basis.size), dtype=complex) for _ in range(conn.p)]
    for (a, beta) in conn.terms:
        modes, vals = conn.coefficients((a, beta), sigma)
        for mode, c in zip(modes, vals):
            rows, cols = shift_pairs(basis, tuple(mode.tolist()))
            out[beta][rows, cols] += (basis.indices[cols, a] + 0.5 * mode[a] - lam[a]) * c
    return [LinearOperator(basis, D) for D in out]


def first_action_operator(scheme: QuantizationScheme, basis: TruncatedBasis) -> LinearOperator:
    return action_operator(scheme, basis, 0)


def dynamic_factor(scheme: QuantizationScheme, basis: TruncatedBasis, t: float) -> LinearOperator:
    """Diagonal unitary ``exp[-i (n_1 + eps_1 - lambda_1) t]``."""
    vals = action_values(scheme, basis)[:, 0]
    return LinearOperator(basis, np.diag(np.exp(-1j * vals * t)))


@dataclass(frozen=True)
class HolonomyResult:
    U: LinearOperator
    path: ParameterPath
    steps: int
    unitarity_residual: float
    block_residual: float

    @property
    def loop(self) -> bool:
        return is_loop(self.path)

    def identity_deviation(self) -> float:
        return float(np.linalg.norm(self.U.matrix - np.eye(self.U.basis.size), 2))

    def summary(self) -> dict:
        return {
            "steps": self.steps,
            "unitarity_residual": self.unitarity_residual,
            "block_residual": self.block_residual,
            "loop": self.loop,
            "identity_deviation": self.identity_deviation(),
        }


def unitarity_residual(U: LinearOperator) -> float:
    idx = U.basis.interior()
    G = U.matrix.conj().T @ U.matrix
    return float(np.linalg.norm(G[np.ix_(idx, idx)] - np.eye(idx.size), 2))


def commutator_norm(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A @ B - B @ A, 2))


def holonomy_operator(
    conn: ControlConnection,
    scheme: QuantizationScheme,
    path: ParameterPath,
    basis: TruncatedBasis,
    steps: int = 1000,
    method: str = "midpoint",
) -> HolonomyResult:
    """``U_2 = T exp[-i int Delta_beta dsigma^beta]`` along ``path``."""
    _check_inputs(conn, scheme, basis)
    if path.p != conn.p:
        raise InvalidInputError(f"path has p={path.p}, connection has p={conn.p}")
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")

    def gen(t, sigma):
        return [D.matrix for D in build_delta(conn, scheme, sigma, basis)]

    U = LinearOperator(basis, path_ordered_exp(path, steps, gen, scale=-1j, method=method))
    I1 = first_action_operator(scheme, basis).matrix
    return HolonomyResult(U, path, steps, unitarity_residual(U), commutator_norm(U.matrix, I1))


def block_positions(scheme: QuantizationScheme, basis: TruncatedBasis, n1: int) -> np.ndarray:
    idx = np.flatnonzero(basis.indices[:, 0] == n1)
    if idx.size == 0:
        raise InvalidInputError(f"no basis states with n_1 = {n1}")
    return idx


def delta_block_terms(
    conn: ControlConnection, scheme: QuantizationScheme, basis: TruncatedBasis, n1: int = 0
) -> list[list[tuple]]:
    """Per parameter axis, pairs ``(polynomial, matrix)`` with
    ``Delta_beta(sigma)[block] = sum poly(sigma) * matrix`` on the ``n_1`` block."""
    _check_inputs(conn, scheme, basis)
    idx = block_positions(scheme, basis, n1)
    local = {int(g): j for j, g in enumerate(idx)}
    lam = scheme.effective_lambda
    out: list[list[tuple]] = [[] for _ in range(conn.p)]
    for (a, beta), comp in conn.terms.items():
        for mode, poly in comp.items():
            rows, cols = shift_pairs(basis, mode)
            B = np.zeros((idx.size, idx.size))
            for r, c in zip(rows, cols):
                if int(c) in local and int(r) in local:
                    B[local[int(r)], local[int(c)]] = basis.indices[c, a] + 0.5 * mode[a] - lam[a]
            if np.any(B):
                out[beta].append((poly, B))
    return out


def holonomy_block(
    conn: ControlConnection,
    scheme: QuantizationScheme,
    path: ParameterPath,
    basis: TruncatedBasis,
    steps: int = 1000,
    n1: int = 0,
    method: str = "midpoint",
    terms: Optional[list] = None,
) -> np.ndarray:
    """Holonomy restricted to the eigenspace ``n_1 = const``.

    Equal to the corresponding block of :func:`holonomy_operator` because the
    generators never couple different ``n_1``. ``terms`` may carry a cached
    result of :func:`delta_block_terms`.
    """
    if terms is None:
        terms = delta_block_terms(conn, scheme, basis, n1)
    size = block_positions(scheme, basis, n1).size

    def gen(t, sigma):
        mats = []
        for axis_terms in terms:
            D = np.zeros((size, size), dtype=complex)
            for poly, B in axis_terms:
                D += poly(sigma) * B
            mats.append(D)
        return mats

    return path_ordered_exp(path, steps, gen, scale=-1j, method=method)


def full_evolution(
    conn: ControlConnection,
    scheme: QuantizationScheme,
    path: ParameterPath,
    basis: TruncatedBasis,
    steps: int = 1000,
    t: float = 1.0,
    method: str = "midpoint",
) -> LinearOperator:
    """Ordered exponential of ``I_1 + Delta_beta dxi^beta/dt`` over a horizon ``t``.

    The path is traversed during ``[0, t]``; the drift ``I_1`` acts for time ``t``.
    """
    _check_inputs(conn, scheme, basis)
    I1 = first_action_operator(scheme, basis).matrix
    sigma0, _ = eval_path(path, 0.0)
    for D in build_delta(conn, scheme, sigma0, basis):
        if commutator_norm(D.matrix, I1) > 0.0:
            raise ConfigurationError("perturbation does not commute with the Hamiltonian")

    def gen(tm, sigma):
        return [D.matrix for D in build_delta(conn, scheme, sigma, basis)]

    return LinearOperator(basis, path_ordered_exp(path, steps, gen, scale=-1j, drift=I1, duration=t, method=method))


def schrodinger_evolve(
    scheme: QuantizationScheme,
    basis: TruncatedBasis,
    H: HamiltonianPoly,
    psi0: StateVector,
    t: float,
) -> StateVector:
    """``psi(t) = sum_n B_n exp(-i E_n t) psi_n``."""
    if psi0.basis != basis:
        raise InvalidInputError("initial state lives on a different basis")
    E = hamiltonian_spectrum(scheme, basis, H)
    return StateVector(basis, psi0.coeff * np.exp(-1j * E * t))


@dataclass(frozen=True)
class BlockReport:
    eigenvalues: list
    positions: list
    blocks: list
    leakage: float

    @property
    def sizes(self) -> list[int]:
        return [len(p) for p in self.positions]


def eigenspace_blocks(
    scheme: QuantizationScheme, basis: TruncatedBasis, U: LinearOperator, tol: Optional[float] = None
) -> BlockReport:
    """Partition the basis by eigenvalue of the first action; report blocks and leakage."""
    tol = DEGENERACY_TOL if tol is None else tol
    vals = action_values(scheme, basis)[:, 0]
    order = np.argsort(vals, kind="stable")
    groups: list[list[int]] = []
    for j in order:
        if groups and abs(vals[j] - vals[groups[-1][0]]) <= tol:
            groups[-1].append(int(j))
        else:
            groups.append([int(j)])
    positions = [np.array(sorted(g)) for g in groups]
    A = np.array(U.matrix, copy=True)
    blocks = []
    for pos in positions:
        sel = np.ix_(pos, pos)
        blocks.append(A[sel].copy())
        A[sel] = 0.0
    leakage = float(np.linalg.norm(A, 2)) if A.size else 0.0
    return BlockReport([float(vals[p[0]]) for p in positions], positions, blocks, leakage)
