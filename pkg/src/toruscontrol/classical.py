"""Classical action-angle dynamics under the control perturbation.

Two routes to the same final state: direct fixed-step RK4 integration of the
Hamilton equations, and the transport operators built from the connection's
generator matrices (angle modes and actions).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .connection import ControlConnection, build_L, build_M
from .errors import ConfigurationError, DivergenceError, InvalidInputError
from .ordered import path_ordered_exp
from .path import ParameterPath, eval_path, time_grid
from .polynomial import HamiltonianPoly
from .torus import ActionAngleState, LinearOperator, TruncatedBasis, wrap_angle


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: Sequence[ActionAngleState]
    path: Optional[ParameterPath] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or len(self.states) != times.size:
            raise InvalidInputError("times and states must have equal lengths")
        if np.any(np.diff(times) <= 0):
            raise InvalidInputError("trajectory times must increase strictly")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def I(self) -> np.ndarray:
        return np.array([s.I for s in self.states])

    @property
    def phi(self) -> np.ndarray:
        return np.array([s.phi for s in self.states])

    @property
    def final(self) -> ActionAngleState:
        return self.states[-1]

    def to_csv(self, fmt: str = ".17g", header_comment: str | None = None) -> str:
        m = self.states[0].m
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"I_{k + 1}" for k in range(m)] + [f"phi_{k + 1}" for k in range(m)])
        for t, s in zip(self.times, self.states):
            w.writerow([format(v, fmt) for v in (t, *s.I, *s.phi)])
        return buf.getvalue()


def _lambda_and_jacobian(conn: ControlConnection, sigma: np.ndarray, phi: np.ndarray):
    """``Lambda (m, p)`` and ``dLambda[alpha, k, i] = d_i Lambda^k_alpha``."""
    lam = np.zeros((conn.m, conn.p))
    jac = np.zeros((conn.p, conn.m, conn.m))
    for (k, a) in conn.terms:
        modes, vals = conn.coefficients((k, a), sigma)
        w = vals * np.exp(1j * (modes @ phi))
        lam[k, a] = w.sum().real
        jac[a, k, :] = (1j * w @ modes).real
    return lam, jac


def _rhs(conn, H, I, phi, sigma, sigma_dot):
    lam, jac = _lambda_and_jacobian(conn, sigma, phi)
    # dI_k = -I_j d_k Lambda^j_alpha sigma_dot^alpha
    I_dot = -np.einsum("j,ajk,a->k", I, jac, sigma_dot)
    phi_dot = H.gradient(I) + lam @ sigma_dot
    return I_dot, phi_dot


def control_rhs(
    state: ActionAngleState,
    conn: ControlConnection,
    sigma,
    sigma_dot,
    H: Optional[HamiltonianPoly] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(dI/dt, dphi/dt)`` of the perturbed Hamilton equations."""
    if state.m != conn.m:
        raise InvalidInputError(f"state has m={state.m}, connection has m={conn.m}")
    H = HamiltonianPoly.zero(conn.m) if H is None else H
    if H.m != conn.m:
        raise InvalidInputError(f"Hamiltonian has m={H.m}, connection has m={conn.m}")
    sigma = conn._check_sigma(sigma)
    sigma_dot = conn._check_sigma(sigma_dot)
    return _rhs(conn, H, state.I, state.phi, sigma, sigma_dot)


def integrate_direct(
    state0: ActionAngleState,
    conn: ControlConnection,
    path: ParameterPath,
    H: Optional[HamiltonianPoly] = None,
    steps: int = 1000,
) -> Trajectory:
    """Classical RK4 over t in [0, 1] with the path knots as step boundaries."""
    if state0.m != conn.m:
        raise InvalidInputError(f"state has m={state0.m}, connection has m={conn.m}")
    if path.p != conn.p:
        raise InvalidInputError(f"path has p={path.p}, connection has p={conn.p}")
    H = HamiltonianPoly.zero(conn.m) if H is None else H
    grid = time_grid(path, steps)
    m = conn.m

    def f(y, t, side):
        sigma, sigma_dot = eval_path(path, t, side)
        dI, dphi = _rhs(conn, H, y[:m], y[m:], sigma, sigma_dot)
        return np.concatenate([dI, dphi])

    y = state0.as_vector()
    states = [state0]
    for j in range(len(grid) - 1):
        t0, t1 = grid[j], grid[j + 1]
        h = t1 - t0
        tm = 0.5 * (t0 + t1)
        # overflow shows up as non-finite values, checked right after the step
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(y, t0, "right")
            k2 = f(y + 0.5 * h * k1, tm, "right")
            k3 = f(y + 0.5 * h * k2, tm, "right")
            k4 = f(y + h * k3, t1, "left")
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise DivergenceError("non-finite state in direct integration", step=j + 1)
        y[m:] = wrap_angle(y[m:])
        states.append(ActionAngleState(y[:m], y[m:]))
    return Trajectory(grid, states, path)


def angle_mode_evolution(
    conn: ControlConnection,
    path: ParameterPath,
    basis: TruncatedBasis,
    steps: int = 1000,
    method: str = "midpoint",
) -> LinearOperator:
    """Evolution matrix ``U`` of the character values ``psi_n(t) = exp(i n.phi(t))``.

    ``psi(1) = U psi(0)`` along every classical angle trajectory, up to the
    truncation of the box. Row ``n`` of ``U`` therefore holds the Fourier
    coefficients of ``phi0 -> exp(i n.phi(1; phi0))``.

    The per-step generator is ``i conj(M_alpha) dxi^alpha`` with ``M_alpha``
    from :func:`build_M`; for connections even in the angles the conjugate is
    a no-op.
    """
    if basis.m != conn.m or path.p != conn.p:
        raise InvalidInputError("basis, path and connection dimensions disagree")
    if basis.margin < conn.support():
        raise ConfigurationError(
            f"basis margin {basis.margin} smaller than connection support {conn.support()}"
        )

    def gen(t, sigma):
        return [np.conj(M.matrix) for M in build_M(conn, sigma, basis)]

    if not conn.terms:
        return LinearOperator.identity(basis)
    return LinearOperator(basis, path_ordered_exp(path, steps, gen, scale=1j, method=method))


def _angle_interpolator(traj: Trajectory, path: ParameterPath):
    """Cubic-spline interpolant of the unwrapped angles, one spline per knot segment."""
    times = traj.times
    phi = np.unwrap(traj.phi, axis=0)
    knots = path.knot_times()
    pieces = []
    for a, b in zip(knots[:-1], knots[1:]):
        sel = (times >= a - 1e-14) & (times <= b + 1e-14)
        if sel.sum() < 2:
            raise InvalidInputError("trajectory does not resolve every path segment")
        if sel.sum() == 2:
            pieces.append((a, b, lambda t, x=times[sel], y=phi[sel]: y[0] + (t - x[0]) * (y[1] - y[0]) / (x[1] - x[0])))
        else:
            pieces.append((a, b, CubicSpline(times[sel], phi[sel], axis=0)))

    def at(t: float) -> np.ndarray:
        for a, b, f in pieces:
            if t <= b:
                return np.asarray(f(t))
        return np.asarray(pieces[-1][2](t))

    return at


def action_transport(
    conn: ControlConnection,
    path: ParameterPath,
    angle_traj: Trajectory,
    steps: int = 1000,
    method: str = "midpoint",
) -> np.ndarray:
    """Real ``(m, m)`` matrix with ``I(1) = U I(0)``.

    The generator ``-L_alpha^T dxi^alpha`` (transposed angle Jacobian of the
    connection) is evaluated along the supplied angle trajectory, interpolated
    to the sample times of each step.
    """
    if angle_traj.path is not None and angle_traj.path.to_record() != path.to_record():
        raise InvalidInputError("trajectory was produced for a different path")
    if abs(angle_traj.times[0]) > 1e-14 or abs(angle_traj.times[-1] - 1.0) > 1e-14:
        raise InvalidInputError("trajectory must span t in [0, 1]")
    if angle_traj.states[0].m != conn.m or path.p != conn.p:
        raise InvalidInputError("trajectory, path and connection dimensions disagree")
    if conn.is_angle_independent():
        return np.eye(conn.m)
    phi_at = _angle_interpolator(angle_traj, path)

    def gen(t, sigma):
        L = build_L(conn, sigma, phi_at(t))
        return [-L[a].T for a in range(conn.p)]

    return np.real(path_ordered_exp(path, steps, gen, scale=1.0, method=method))


def canonical_shift(state: ActionAngleState, t: float, F: HamiltonianPoly) -> ActionAngleState:
    """Actions unchanged, angles advanced by ``t * grad F(I)``."""
    return ActionAngleState(state.I, state.phi + t * F.gradient(state.I))
