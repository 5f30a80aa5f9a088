"""Multi-index bookkeeping, angle arithmetic and sparse Fourier series on T^m.

Multi-indices are plain integer tuples. A :class:`FourierSeries` stores only
the modes it carries; mode arithmetic is exact integer arithmetic.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, InvalidInputError

TWO_PI = 2.0 * np.pi
REALITY_TOL = 1e-12

MultiIndex = tuple  # tuple[int, ...]


def wrap_angle(phi) -> np.ndarray:
    """Wrap angles component-wise into ``[0, 2*pi)``."""
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise InvalidInputError("angles must be finite")
    out = np.mod(phi, TWO_PI)
    # np.mod of a tiny negative number rounds up to exactly 2*pi
    out = np.where(out >= TWO_PI, 0.0, out)
    return out


@dataclass(frozen=True)
class ActionAngleState:
    """Classical state: actions ``I`` and angles ``phi`` (wrapped)."""

    I: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        I = np.array(self.I, dtype=float).reshape(-1)
        phi = wrap_angle(np.array(self.phi, dtype=float).reshape(-1))
        if I.shape != phi.shape:
            raise InvalidInputError(f"I has {I.size} entries but phi has {phi.size}")
        if not np.all(np.isfinite(I)):
            raise InvalidInputError("actions must be finite")
        I.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "I", I)
        object.__setattr__(self, "phi", phi)

    @property
    def m(self) -> int:
        return self.I.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.I, self.phi])


@dataclass(frozen=True)
class TruncatedBasis:
    """Box ``|n_k| <= n_max`` of characters ``exp(i n.phi)`` in lexicographic order.

    The interior sub-box ``|n_k| <= n_max - margin`` is where operator
    identities are exact despite truncation.
    """

    m: int
    n_max: int
    margin: int = 0
    indices: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError(f"m must be >= 1, got {self.m}")
        if self.n_max < 0:
            raise ConfigurationError(f"n_max must be >= 0, got {self.n_max}")
        if not 0 <= self.margin <= self.n_max:
            raise ConfigurationError(
                f"margin must satisfy 0 <= margin <= n_max, got margin={self.margin}, n_max={self.n_max}"
            )
        r = range(-self.n_max, self.n_max + 1)
        idx = np.array(list(itertools.product(r, repeat=self.m)), dtype=np.int64)
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return (2 * self.n_max + 1) ** self.m

    @property
    def order(self) -> list[MultiIndex]:
        return [tuple(int(v) for v in row) for row in self.indices]

    def contains(self, n: Sequence[int]) -> bool:
        return len(n) == self.m and all(abs(int(v)) <= self.n_max for v in n)

    def index_of(self, n: Sequence[int]) -> int:
        if not self.contains(n):
            raise InvalidInputError(f"multi-index {tuple(n)} outside the box n_max={self.n_max}")
        width = 2 * self.n_max + 1
        j = 0
        for v in n:
            j = j * width + (int(v) + self.n_max)
        return j

    def interior_mask(self) -> np.ndarray:
        return np.all(np.abs(self.indices) <= self.n_max - self.margin, axis=1)

    def interior(self) -> np.ndarray:
        """Positions (into the basis order) of the interior sub-box."""
        return np.flatnonzero(self.interior_mask())

    def basis_vector(self, n: Sequence[int]) -> np.ndarray:
        v = np.zeros(self.size, dtype=complex)
        v[self.index_of(n)] = 1.0
        return v


def enumerate_basis(m: int, n_max: int, margin: int = 0) -> TruncatedBasis:
    return TruncatedBasis(m, n_max, margin)


@functools.lru_cache(maxsize=4096)
def shift_pairs(basis: TruncatedBasis, mode: MultiIndex) -> tuple[np.ndarray, np.ndarray]:
    """Positions ``(rows, cols)`` with ``order[rows] = order[cols] + mode``.

    Pairs whose target leaves the box are dropped, which is the truncation
    rule for every multiplication operator.
    """
    shifted = basis.indices + np.asarray(mode, dtype=np.int64)
    keep = np.all(np.abs(shifted) <= basis.n_max, axis=1)
    cols = np.flatnonzero(keep)
    width = 2 * basis.n_max + 1
    rows = np.zeros(cols.size, dtype=np.int64)
    for k in range(basis.m):
        rows = rows * width + (shifted[keep, k] + basis.n_max)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


@dataclass(frozen=True)
class FourierSeries:
    """Finite Fourier series ``sum_n c_n exp(i n.phi)`` on T^m.

    With ``is_real`` set, the reality condition ``c_{-n} = conj(c_n)`` is
    checked on construction.
    """

    m: int
    coeffs: Mapping[MultiIndex, complex]
    is_real: bool = False

    def __post_init__(self):
        clean: dict[MultiIndex, complex] = {}
        for n, c in self.coeffs.items():
            n = tuple(int(v) for v in n)
            if len(n) != self.m:
                raise InvalidInputError(f"mode {n} does not have {self.m} components")
            c = complex(c)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise InvalidInputError(f"non-finite coefficient at mode {n}")
            clean[n] = clean.get(n, 0j) + c
        object.__setattr__(self, "coeffs", clean)
        if self.is_real:
            for n, c in clean.items():
                partner = clean.get(tuple(-v for v in n), 0j)
                if abs(partner - c.conjugate()) > REALITY_TOL * max(1.0, abs(c)):
                    raise InvalidInputError(
                        f"series flagged real violates c(-n) = conj(c(n)) at mode {n}"
                    )

    # constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, m: int) -> "FourierSeries":
        return cls(m, {}, is_real=True)

    @classmethod
    def constant(cls, m: int, value: float) -> "FourierSeries":
        return cls(m, {(0,) * m: value}, is_real=bool(np.isreal(value)))

    @classmethod
    def character(cls, n: Sequence[int], coeff: complex = 1.0) -> "FourierSeries":
        return cls(len(n), {tuple(n): coeff})

    @classmethod
    def cosine(cls, n: Sequence[int], amplitude: float = 1.0) -> "FourierSeries":
        """``amplitude * cos(n.phi)``."""
        n = tuple(n)
        neg = tuple(-v for v in n)
        if n == neg:
            return cls.constant(len(n), amplitude)
        return cls(len(n), {n: amplitude / 2, neg: amplitude / 2}, is_real=True)

    @classmethod
    def sine(cls, n: Sequence[int], amplitude: float = 1.0) -> "FourierSeries":
        """``amplitude * sin(n.phi)``."""
        n = tuple(n)
        neg = tuple(-v for v in n)
        if n == neg:
            return cls.zero(len(n))
        return cls(len(n), {n: -0.5j * amplitude, neg: 0.5j * amplitude}, is_real=True)

    # helpers ----------------------------------------------------------------

    def support(self) -> int:
        """Largest ``|n_k|`` over stored modes (0 for an empty series)."""
        return max((max(abs(v) for v in n) for n in self.coeffs), default=0)

    def modes_array(self) -> np.ndarray:
        return np.array(list(self.coeffs), dtype=np.int64).reshape(-1, self.m)

    def values_array(self) -> np.ndarray:
        return np.array(list(self.coeffs.values()), dtype=complex)

    def coefficient_vector(self, basis: TruncatedBasis) -> np.ndarray:
        """Coefficients over ``basis``; modes outside the box are dropped."""
        if basis.m != self.m:
            raise InvalidInputError(f"basis has m={basis.m}, series has m={self.m}")
        v = np.zeros(basis.size, dtype=complex)
        for n, c in self.coeffs.items():
            if basis.contains(n):
                v[basis.index_of(n)] += c
        return v

    def scale(self, a: complex) -> "FourierSeries":
        real = self.is_real and np.isreal(a)
        return FourierSeries(self.m, {n: a * c for n, c in self.coeffs.items()}, is_real=bool(real))

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        if other.m != self.m:
            raise InvalidInputError("cannot add series on tori of different dimension")
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out.get(n, 0j) + c
        return FourierSeries(self.m, out, is_real=self.is_real and other.is_real)

    def __neg__(self) -> "FourierSeries":
        return self.scale(-1.0)

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        return self + (-other)

    def to_records(self) -> list[dict]:
        return [
            {"mode": list(n), "re": float(c.real), "im": float(c.imag)}
            for n, c in sorted(self.coeffs.items())
        ]

    @classmethod
    def from_records(cls, records: Iterable[Mapping], m: int, real: bool = True) -> "FourierSeries":
        coeffs: dict[MultiIndex, complex] = {}
        for rec in records:
            n = tuple(int(v) for v in rec["mode"])
            coeffs[n] = coeffs.get(n, 0j) + complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))
        return cls(m, coeffs, is_real=real)


def fourier_eval(f: FourierSeries, phi) -> complex | np.ndarray:
    """Evaluate ``f`` at one angle vector (shape ``(m,)``) or a batch ``(N, m)``."""
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise InvalidInputError("angles must be finite")
    single = phi.ndim == 1
    pts = np.atleast_2d(phi)
    if pts.shape[1] != f.m:
        raise InvalidInputError(f"expected angles with {f.m} components, got shape {phi.shape}")
    if not f.coeffs:
        out = np.zeros(pts.shape[0], dtype=complex)
    else:
        out = np.exp(1j * (pts @ f.modes_array().T)) @ f.values_array()
    return complex(out[0]) if single else out


def fourier_mul(f: FourierSeries, g: FourierSeries) -> FourierSeries:
    """Product of two series: convolution of the coefficient maps."""
    if f.m != g.m:
        raise InvalidInputError("cannot multiply series on tori of different dimension")
    out: dict[MultiIndex, complex] = {}
    for n1, c1 in f.coeffs.items():
        for n2, c2 in g.coeffs.items():
            n = tuple(a + b for a, b in zip(n1, n2))
            out[n] = out.get(n, 0j) + c1 * c2
    out = {n: c for n, c in out.items() if c != 0}
    return FourierSeries(f.m, out, is_real=f.is_real and g.is_real)


def fourier_derivative(f: FourierSeries, k: int) -> FourierSeries:
    """Partial derivative along angle axis ``k`` (0-based): ``c_n -> i n_k c_n``."""
    if not 0 <= k < f.m:
        raise InvalidInputError(f"axis {k} out of range for m={f.m}")
    out = {n: 1j * n[k] * c for n, c in f.coeffs.items() if n[k] != 0}
    return FourierSeries(f.m, out, is_real=f.is_real)


@dataclass(frozen=True)
class StateVector:
    """Complex coefficients over a truncated character basis."""

    basis: TruncatedBasis
    coeff: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeff, dtype=complex).reshape(-1)
        if c.size != self.basis.size:
            raise InvalidInputError(f"state has {c.size} coefficients, basis has {self.basis.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)

    @classmethod
    def character(cls, basis: TruncatedBasis, n: Sequence[int]) -> "StateVector":
        return cls(basis, basis.basis_vector(n))

    def evaluate(self, phi) -> complex | np.ndarray:
        """Value of the represented function at angle(s) ``phi``."""
        phi = np.asarray(phi, dtype=float)
        pts = np.atleast_2d(phi)
        out = np.exp(1j * (pts @ self.basis.indices.T)) @ self.coeff
        return complex(out[0]) if phi.ndim == 1 else out


@dataclass(frozen=True)
class LinearOperator:
    """Dense complex matrix acting on coefficient vectors over ``basis``."""

    basis: TruncatedBasis
    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix)
        if A.shape != (self.basis.size, self.basis.size):
            raise InvalidInputError(f"matrix shape {A.shape} does not match basis size {self.basis.size}")
        object.__setattr__(self, "matrix", A)

    @classmethod
    def identity(cls, basis: TruncatedBasis) -> "LinearOperator":
        return cls(basis, np.eye(basis.size, dtype=complex))

    def interior_block(self) -> np.ndarray:
        idx = self.basis.interior()
        return self.matrix[np.ix_(idx, idx)]

    def adjoint(self) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix.conj().T)

    def apply(self, state: StateVector) -> StateVector:
        if state.basis != self.basis:
            raise InvalidInputError("state and operator live on different bases")
        return StateVector(self.basis, self.matrix @ state.coeff)

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            if other.basis != self.basis:
                raise InvalidInputError("operators live on different bases")
            return LinearOperator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            return self.apply(other)
        return self.matrix @ other

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix - other.matrix)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix + other.matrix)


def multiplication_matrix(f: FourierSeries, basis: TruncatedBasis) -> np.ndarray:
    """Matrix of ``psi -> f psi`` on the box; products leaving the box are dropped."""
    if f.m != basis.m:
        raise InvalidInputError(f"series has m={f.m}, basis has m={basis.m}")
    A = np.zeros((basis.size, basis.size), dtype=complex)
    for n, c in f.coeffs.items():
        rows, cols = shift_pairs(basis, n)
        A[rows, cols] += c
    return A
