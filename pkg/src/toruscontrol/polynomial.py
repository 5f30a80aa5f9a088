"""Sparse multivariate polynomials.

Used for the sigma-dependence of connection coefficients and for
Hamiltonians of the actions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

import numpy as np

from .errors import InvalidInputError


def _monomial(x: np.ndarray, powers: tuple) -> np.ndarray:
    # repeated multiplication, so that scalar and diagonal-matrix paths round identically
    out = np.ones(x.shape[:-1], dtype=x.dtype)
    for k, p in enumerate(powers):
        for _ in range(p):
            out = out * x[..., k]
    return out


@dataclass(frozen=True)
class Polynomial:
    """``sum_c coeff * prod_k x_k**powers_k`` with exponent tuples as keys."""

    nvars: int
    terms: Mapping[tuple, complex]

    def __post_init__(self):
        clean: dict[tuple, complex] = {}
        for powers, c in self.terms.items():
            powers = tuple(int(p) for p in powers)
            if len(powers) != self.nvars or any(p < 0 for p in powers):
                raise InvalidInputError(f"bad exponent tuple {powers} for {self.nvars} variables")
            c = complex(c)
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise InvalidInputError(f"non-finite coefficient for exponent {powers}")
            clean[powers] = clean.get(powers, 0j) + c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def constant(cls, nvars: int, c: complex) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.terms.values())

    def __call__(self, x) -> complex | np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.nvars,):
            raise InvalidInputError(f"expected {self.nvars} variables, got shape {x.shape}")
        if x.ndim == 1:
            # single point: plain floats avoid array overhead in the per-step loops
            xs = x.tolist()
            total = 0j
            for powers, c in self.terms.items():
                v = 1.0
                for k, p in enumerate(powers):
                    for _ in range(p):
                        v *= xs[k]
                total += c * v
            return total
        out = np.zeros(x.shape[:-1], dtype=complex)
        for powers, c in self.terms.items():
            out = out + c * _monomial(x, powers)
        return complex(out) if out.ndim == 0 else out

    def derivative(self, k: int) -> "Polynomial":
        out = {}
        for powers, c in self.terms.items():
            if powers[k] > 0:
                lowered = powers[:k] + (powers[k] - 1,) + powers[k + 1:]
                out[lowered] = out.get(lowered, 0j) + c * powers[k]
        return Polynomial(self.nvars, out)

    def conjugate(self) -> "Polynomial":
        return Polynomial(self.nvars, {p: c.conjugate() for p, c in self.terms.items()})

    def degree(self) -> int:
        return max((sum(p) for p in self.terms), default=0)

    def to_records(self) -> list[dict]:
        recs = []
        for powers, c in sorted(self.terms.items()):
            rec = {"powers": list(powers), "coeff": float(c.real)}
            if c.imag != 0:
                rec["coeff_im"] = float(c.imag)
            recs.append(rec)
        return recs

    @classmethod
    def from_records(cls, records: Iterable[Mapping], nvars: int) -> "Polynomial":
        terms: dict[tuple, complex] = {}
        for rec in records:
            powers = tuple(int(p) for p in rec["powers"])
            c = complex(float(rec["coeff"]), float(rec.get("coeff_im", 0.0)))
            terms[powers] = terms.get(powers, 0j) + c
        return cls(nvars, terms)


@dataclass(frozen=True)
class HamiltonianPoly:
    """Real Hamiltonian of the actions.

    ``poly`` is the polynomial part. ``func``/``grad`` optionally override it
    with an analytic evaluator; both act on arrays of action vectors of shape
    ``(..., m)``.
    """

    poly: Polynomial
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if not self.poly.is_real:
            raise InvalidInputError("Hamiltonian polynomial must have real coefficients")

    @classmethod
    def from_terms(cls, m: int, terms: Mapping[tuple, float]) -> "HamiltonianPoly":
        return cls(Polynomial(m, terms))

    @classmethod
    def zero(cls, m: int) -> "HamiltonianPoly":
        return cls(Polynomial(m, {}))

    @property
    def m(self) -> int:
        return self.poly.nvars

    def __call__(self, I) -> float | np.ndarray:
        I = np.asarray(I, dtype=float)
        if self.func is not None:
            return self.func(I)
        out = self.poly(I)
        return np.real(out) if isinstance(out, np.ndarray) else out.real

    def gradient(self, I) -> np.ndarray:
        I = np.asarray(I, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(I), dtype=float)
        if self.func is not None:
            raise InvalidInputError("analytic Hamiltonian given without its gradient")
        return np.stack(
            [np.real(np.asarray(self.poly.derivative(k)(I))) for k in range(self.m)], axis=-1
        )
