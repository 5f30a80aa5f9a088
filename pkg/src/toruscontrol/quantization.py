"""Quantization of the affine observables ``f = a^k(phi) I_k + b(phi)`` on T*T^m.

Operators act on coefficient vectors over a :class:`TruncatedBasis` of
characters ``psi_n = exp(i n.phi)``. A representation is fixed by the real
numbers ``lambda_k`` and a half-form twist ``eps_k`` in {0, 1/2}; every
builder uses the twist-reduced value ``lambda_k - eps_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .polynomial import HamiltonianPoly
from .torus import (
    FourierSeries,
    LinearOperator,
    StateVector,
    TruncatedBasis,
    fourier_derivative,
    fourier_mul,
    multiplication_matrix,
)


@dataclass(frozen=True)
class QuantizationScheme:
    lam: np.ndarray
    twist: np.ndarray = None

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float).reshape(-1)
        twist = np.zeros_like(lam) if self.twist is None else np.array(self.twist, dtype=float).reshape(-1)
        if twist.shape != lam.shape:
            raise ConfigurationError("lambda and twist must have the same length")
        if not np.all((twist == 0.0) | (twist == 0.5)):
            raise ConfigurationError(f"twist entries must be 0 or 1/2, got {twist.tolist()}")
        if not np.all(np.isfinite(lam)):
            raise ConfigurationError("lambda must be finite")
        lam.setflags(write=False)
        twist.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "twist", twist)

    @classmethod
    def trivial(cls, m: int) -> "QuantizationScheme":
        return cls(np.zeros(m))

    @property
    def m(self) -> int:
        return self.lam.size

    @property
    def effective_lambda(self) -> np.ndarray:
        return self.lam - self.twist

    def __eq__(self, other):
        return (
            isinstance(other, QuantizationScheme)
            and np.array_equal(self.lam, other.lam)
            and np.array_equal(self.twist, other.twist)
        )

    def __hash__(self):
        return hash((self.lam.tobytes(), self.twist.tobytes()))


def _check(scheme: QuantizationScheme, basis: TruncatedBasis):
    if scheme.m != basis.m:
        raise InvalidInputError(f"scheme has m={scheme.m}, basis has m={basis.m}")


def action_values(scheme: QuantizationScheme, basis: TruncatedBasis) -> np.ndarray:
    """Eigenvalues ``n_k + eps_k - lambda_k`` of all action operators, shape ``(N, m)``."""
    _check(scheme, basis)
    return basis.indices - scheme.effective_lambda


def action_operator(scheme: QuantizationScheme, basis: TruncatedBasis, k: int) -> LinearOperator:
    if not 0 <= k < basis.m:
        raise InvalidInputError(f"axis {k} out of range for m={basis.m}")
    vals = action_values(scheme, basis)[:, k]
    return LinearOperator(basis, np.diag(vals.astype(complex)))


@dataclass(frozen=True)
class AffineObservable:
    """``f = sum_k a[k](phi) I_k + b(phi)`` with real Fourier series."""

    a: tuple
    b: FourierSeries

    def __post_init__(self):
        a = tuple(self.a)
        m = self.b.m
        if len(a) != m or any(s.m != m for s in a):
            raise InvalidInputError("need one coefficient series per action, all on the same torus")
        if not (self.b.is_real and all(s.is_real for s in a)):
            raise InvalidInputError("affine observables must have real coefficient series")
        object.__setattr__(self, "a", a)

    @property
    def m(self) -> int:
        return self.b.m

    @classmethod
    def action(cls, m: int, k: int) -> "AffineObservable":
        a = [FourierSeries.zero(m) for _ in range(m)]
        a[k] = FourierSeries.constant(m, 1.0)
        return cls(tuple(a), FourierSeries.zero(m))

    @classmethod
    def function(cls, b: FourierSeries) -> "AffineObservable":
        return cls(tuple(FourierSeries.zero(b.m) for _ in range(b.m)), b)

    def support(self) -> int:
        return max([self.b.support()] + [s.support() for s in self.a])

    def __call__(self, I, phi) -> float:
        from .torus import fourier_eval

        val = fourier_eval(self.b, phi) + sum(np.asarray(I)[k] * fourier_eval(s, phi) for k, s in enumerate(self.a))
        return float(np.real(val))


def poisson_bracket(f: AffineObservable, g: AffineObservable) -> AffineObservable:
    """``{f, g} = df/dI_i dg/dphi^i - df/dphi^i dg/dI_i``, again affine.

    With ``f = a.I + b`` and ``g = c.I + d``: the new action coefficients are
    ``a^i d_i c^k - c^i d_i a^k`` and the new free term is ``a^i d_i d - c^i d_i b``.
    """
    if f.m != g.m:
        raise InvalidInputError("observables live on tori of different dimension")
    m = f.m
    zero = FourierSeries.zero(m)

    def lie(u, v):  # u^i d_i v
        out = zero
        for i in range(m):
            out = out + fourier_mul(u[i], fourier_derivative(v, i))
        return out

    new_a = tuple(lie(f.a, g.a[k]) - lie(g.a, f.a[k]) for k in range(m))
    new_b = lie(f.a, g.b) - lie(g.a, f.b)
    return AffineObservable(new_a, new_b)


def quantize_affine(
    scheme: QuantizationScheme, basis: TruncatedBasis, a: Sequence[FourierSeries], b: FourierSeries
) -> LinearOperator:
    """Operator ``-i a^k d_k - (i/2) d_k a^k - a^k lambda_k + b`` on the box."""
    _check(scheme, basis)
    obs = AffineObservable(tuple(a), b)
    if obs.support() > basis.margin:
        raise ConfigurationError(
            f"observable support {obs.support()} exceeds basis margin {basis.margin}"
        )
    lam = scheme.effective_lambda
    n = basis.indices
    A = multiplication_matrix(b, basis)
    divergence = FourierSeries.zero(basis.m)
    for k, ak in enumerate(obs.a):
        if not ak.coeffs:
            continue
        mult = multiplication_matrix(ak, basis)
        # -i a^k d_k: d_k is diagonal with entries i n_k
        A += mult * n[:, k][None, :]
        A -= lam[k] * mult
        divergence = divergence + fourier_derivative(ak, k)
    A += -0.5j * multiplication_matrix(divergence, basis)
    return LinearOperator(basis, A)


def quantize(scheme: QuantizationScheme, basis: TruncatedBasis, f: AffineObservable) -> LinearOperator:
    return quantize_affine(scheme, basis, f.a, f.b)


def hamiltonian_spectrum(scheme: QuantizationScheme, basis: TruncatedBasis, H: HamiltonianPoly) -> np.ndarray:
    """``E_n = H(n + eps - lambda)`` over the basis order."""
    if H.m != basis.m:
        raise InvalidInputError(f"Hamiltonian has m={H.m}, basis has m={basis.m}")
    return np.asarray(H(action_values(scheme, basis)), dtype=float)


def hamiltonian_operator(scheme: QuantizationScheme, basis: TruncatedBasis, H: HamiltonianPoly) -> LinearOperator:
    """Polynomial ``H`` evaluated on the action operators by matrix products."""
    if H.func is not None:
        raise InvalidInputError("only polynomial Hamiltonians can be built from operator products")
    ops = [action_operator(scheme, basis, k).matrix for k in range(basis.m)]
    N = basis.size
    out = np.zeros((N, N), dtype=complex)
    for powers, c in H.poly.terms.items():
        term = np.eye(N, dtype=complex)
        for k, p in enumerate(powers):
            for _ in range(p):
                term = term @ ops[k]
        out = out + c * term
    return LinearOperator(basis, out)


def interior_norm(A: np.ndarray, basis: TruncatedBasis) -> float:
    idx = basis.interior()
    if idx.size == 0:
        return 0.0
    return float(np.linalg.norm(A[np.ix_(idx, idx)], 2))


def dirac_residual(
    scheme: QuantizationScheme, basis: TruncatedBasis, f: AffineObservable, g: AffineObservable
) -> float:
    """Interior operator norm of ``[f^, g^] + i {f, g}^``."""
    bracket = poisson_bracket(f, g)
    for name, obs in (("f", f), ("g", g), ("{f,g}", bracket)):
        if obs.support() > basis.margin:
            raise ConfigurationError(f"support of {name} ({obs.support()}) exceeds margin {basis.margin}")
    F = quantize(scheme, basis, f).matrix
    G = quantize(scheme, basis, g).matrix
    B = quantize(scheme, basis, bracket).matrix
    return interior_norm(F @ G - G @ F + 1j * B, basis)


def gauge_overlap(basis: TruncatedBasis, d: Sequence[int]) -> np.ndarray:
    """Positions ``n`` with both ``n`` and ``n + d`` in the box."""
    d = np.asarray(d, dtype=np.int64)
    return np.flatnonzero(np.all(np.abs(basis.indices + d) <= basis.n_max, axis=1))


def gauge_conjugate(
    scheme: QuantizationScheme, basis: TruncatedBasis, d: Sequence[int]
) -> tuple[QuantizationScheme, LinearOperator]:
    """Scheme with ``lambda - d`` and the intertwiner ``psi -> psi_d psi``.

    On the overlap block ``W^-1 I_k^(lambda) W = I_k^(lambda - d)``.
    """
    _check(scheme, basis)
    d = tuple(int(v) for v in d)
    if len(d) != basis.m:
        raise InvalidInputError(f"shift {d} does not have m={basis.m} entries")
    if gauge_overlap(basis, d).size == 0:
        raise ConfigurationError(f"shift {d} leaves no overlap inside the box n_max={basis.n_max}")
    W = multiplication_matrix(FourierSeries.character(d), basis)
    return QuantizationScheme(scheme.lam - np.asarray(d, dtype=float), scheme.twist), LinearOperator(basis, W)


def twist_reduce(scheme: QuantizationScheme) -> QuantizationScheme:
    """Equivalent twist-free scheme: ``lambda_j -> lambda_j - 1/2`` on twisted axes."""
    return QuantizationScheme(scheme.effective_lambda, np.zeros(scheme.m))


def inner_product(u: StateVector, v: StateVector) -> complex:
    """``<u|v> = sum_n u_n conj(v_n)``, the normalized torus integral of ``u conj(v)``."""
    if u.basis != v.basis:
        raise InvalidInputError("states live on different bases")
    return complex(np.sum(u.coeff * np.conj(v.coeff)))
