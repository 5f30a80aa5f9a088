"""The control connection Lambda^i_alpha(sigma, phi) and its generator matrices.

Each component ``(i, alpha)`` is a finite Fourier series on T^m whose
coefficients are polynomials in the parameters ``sigma``. Indices ``i``
(fibre axis) and ``alpha`` (parameter axis) are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .polynomial import Polynomial
from .torus import REALITY_TOL, FourierSeries, LinearOperator, TruncatedBasis, fourier_derivative, shift_pairs

RESIDUE_TOL = 1e-12


def _neg(mode: tuple) -> tuple:
    return tuple(-v for v in mode)


def _poly_close(a: Polynomial, b: Polynomial, tol: float = REALITY_TOL) -> bool:
    keys = set(a.terms) | set(b.terms)
    return all(abs(a.terms.get(k, 0j) - b.terms.get(k, 0j)) <= tol for k in keys)


@dataclass(frozen=True)
class ControlConnection:
    """Connection coefficients ``terms[(i, alpha)][mode] = polynomial in sigma``.

    The reality condition ``c_{-n}(sigma) = conj(c_n(sigma))`` is enforced on
    construction, coefficient by coefficient of the polynomials.
    """

    m: int
    p: int
    terms: Mapping[tuple, Mapping[tuple, Polynomial]]
    _compiled: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1 or self.p < 1:
            raise ConfigurationError(f"need m >= 1 and p >= 1, got m={self.m}, p={self.p}")
        clean: dict[tuple, dict[tuple, Polynomial]] = {}
        for (i, a), modes in self.terms.items():
            if not (0 <= i < self.m and 0 <= a < self.p):
                raise ConfigurationError(f"component (i={i}, alpha={a}) out of range")
            comp = {}
            for mode, poly in modes.items():
                mode = tuple(int(v) for v in mode)
                if len(mode) != self.m:
                    raise ConfigurationError(f"mode {mode} does not have m={self.m} entries")
                if poly.nvars != self.p:
                    raise ConfigurationError(f"polynomial for mode {mode} is not in p={self.p} variables")
                comp[mode] = poly
            for mode, poly in comp.items():
                partner = comp.get(_neg(mode), Polynomial(self.p, {}))
                if not _poly_close(partner, poly.conjugate()):
                    raise InvalidInputError(
                        f"component (i={i}, alpha={a}) violates the reality condition at mode {mode}"
                    )
            if comp:
                clean[(int(i), int(a))] = comp
        object.__setattr__(self, "terms", clean)
        compiled = {
            key: (np.array(list(comp), dtype=np.int64).reshape(-1, self.m), list(comp.values()))
            for key, comp in clean.items()
        }
        object.__setattr__(self, "_compiled", compiled)

    @classmethod
    def zero(cls, m: int, p: int) -> "ControlConnection":
        return cls(m, p, {})

    @classmethod
    def from_series(cls, m: int, p: int, components: Mapping[tuple, FourierSeries]) -> "ControlConnection":
        """Connection with sigma-independent components given as real series."""
        terms = {}
        for key, f in components.items():
            if not f.is_real:
                raise InvalidInputError(f"component {key} must be a real series")
            terms[key] = {n: Polynomial.constant(p, c) for n, c in f.coeffs.items()}
        return cls(m, p, terms)

    # ------------------------------------------------------------------

    def support(self) -> int:
        return max((max(abs(v) for v in mode) for comp in self.terms.values() for mode in comp), default=0)

    def touches_axis(self, k: int) -> bool:
        """True if any component has fibre index ``k`` or a mode along angle ``k``."""
        return any(i == k or any(mode[k] != 0 for mode in comp) for (i, _), comp in self.terms.items())

    def touched_axes(self) -> list[int]:
        return [k for k in range(self.m) if self.touches_axis(k)]

    def restrict(self, axes) -> "ControlConnection":
        """Same connection on the sub-torus of ``axes``.

        Exact when no component involves the dropped axes; the dynamics then
        factor and the dropped angles and actions stay constant.
        """
        axes = [int(k) for k in axes]
        dropped = [k for k in range(self.m) if k not in axes]
        if any(self.touches_axis(k) for k in dropped):
            raise InvalidInputError(f"connection involves axes outside {axes}")
        pos = {k: j for j, k in enumerate(axes)}
        terms = {
            (pos[i], a): {tuple(mode[k] for k in axes): poly for mode, poly in comp.items()}
            for (i, a), comp in self.terms.items()
        }
        return ControlConnection(len(axes), self.p, terms)

    def is_angle_independent(self) -> bool:
        return all(not any(mode) for comp in self.terms.values() for mode in comp)

    def coefficients(self, key: tuple, sigma) -> tuple[np.ndarray, np.ndarray]:
        """Modes ``(K, m)`` and coefficient values ``(K,)`` of component ``key`` at ``sigma``."""
        sigma = self._check_sigma(sigma)
        if key not in self._compiled:
            return np.zeros((0, self.m), dtype=np.int64), np.zeros(0, dtype=complex)
        modes, polys = self._compiled[key]
        return modes, np.array([poly(sigma) for poly in polys], dtype=complex)

    def series(self, i: int, alpha: int, sigma) -> FourierSeries:
        modes, vals = self.coefficients((i, alpha), sigma)
        return FourierSeries(self.m, {tuple(n): c for n, c in zip(modes.tolist(), vals)}, is_real=True)

    def _check_sigma(self, sigma) -> np.ndarray:
        sigma = np.asarray(sigma, dtype=float).reshape(-1)
        if sigma.size != self.p:
            raise InvalidInputError(f"sigma has {sigma.size} entries, connection has p={self.p}")
        if not np.all(np.isfinite(sigma)):
            raise InvalidInputError("sigma must be finite")
        return sigma

    def _check_phi(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float).reshape(-1)
        if phi.size != self.m:
            raise InvalidInputError(f"phi has {phi.size} entries, connection has m={self.m}")
        if not np.all(np.isfinite(phi)):
            raise InvalidInputError("phi must be finite")
        return phi

    # serialization -------------------------------------------------------

    def to_record(self) -> dict:
        terms = []
        for (i, a), comp in sorted(self.terms.items()):
            for mode, poly in sorted(comp.items()):
                terms.append({"i": i, "alpha": a, "mode": list(mode), "poly": poly.to_records()})
        return {"m": self.m, "p": self.p, "terms": terms}

    @classmethod
    def from_record(cls, record: Mapping, reality: str = "symmetrize") -> "ControlConnection":
        """Load ``{m, p, terms: [{i, alpha, mode, poly}]}``.

        ``reality="symmetrize"`` completes missing conjugate partners and
        averages inconsistent pairs; ``"reject"`` raises on any violation.
        """
        m, p = int(record["m"]), int(record["p"])
        raw: dict[tuple, dict[tuple, Polynomial]] = {}
        for t in record.get("terms", []):
            key = (int(t["i"]), int(t["alpha"]))
            mode = tuple(int(v) for v in t["mode"])
            poly = Polynomial.from_records(t["poly"], p)
            comp = raw.setdefault(key, {})
            if mode in comp:
                merged = dict(comp[mode].terms)
                for k, c in poly.terms.items():
                    merged[k] = merged.get(k, 0j) + c
                poly = Polynomial(p, merged)
            comp[mode] = poly
        if reality == "symmetrize":
            raw = {key: _symmetrize(comp, p) for key, comp in raw.items()}
        elif reality != "reject":
            raise ConfigurationError(f"unknown reality policy {reality!r}", field="connection.reality")
        return cls(m, p, raw)


def _symmetrize(comp: dict[tuple, Polynomial], p: int) -> dict[tuple, Polynomial]:
    out: dict[tuple, Polynomial] = {}
    for mode in sorted(set(comp) | {_neg(n) for n in comp}):
        if mode in out:
            continue
        neg = _neg(mode)
        a = comp.get(mode)
        b = comp.get(neg)
        if a is None:
            a = b.conjugate()
        elif b is None:
            b = a.conjugate()
        elif not _poly_close(b, a.conjugate()):
            keys = set(a.terms) | set(b.terms)
            avg = {k: 0.5 * (a.terms.get(k, 0j) + b.terms.get(k, 0j).conjugate()) for k in keys}
            a = Polynomial(p, avg)
            b = a.conjugate()
        if mode == neg:
            a = Polynomial(p, {k: c.real for k, c in a.terms.items()})
            b = a
        out[mode] = a
        out[neg] = b
    return out


def eval_lambda(conn: ControlConnection, sigma, phi) -> np.ndarray:
    """Connection matrix ``Lambda[i, alpha]`` (shape ``(m, p)``) at ``(sigma, phi)``."""
    sigma = conn._check_sigma(sigma)
    phi = conn._check_phi(phi)
    out = np.zeros((conn.m, conn.p))
    for key in conn.terms:
        modes, vals = conn.coefficients(key, sigma)
        z = np.exp(1j * (modes @ phi)) @ vals
        if abs(z.imag) > RESIDUE_TOL * max(1.0, abs(z.real)):
            raise InvalidInputError(f"imaginary residue {abs(z.imag):.3e} in component {key}")
        out[key] = z.real
    return out


def build_M(conn: ControlConnection, sigma, basis: TruncatedBasis) -> list[LinearOperator]:
    """Angle-mode generators, one ``(N, N)`` matrix per parameter axis.

    Entry ``[row n, col k]`` of matrix ``alpha`` is ``sum_i n_i Lambda^i_{alpha, n-k}(sigma)``.
    Products landing outside the box are dropped.
    """
    if basis.m != conn.m:
        raise InvalidInputError(f"basis has m={basis.m}, connection has m={conn.m}")
    sigma = conn._check_sigma(sigma)
    out = [np.zeros((basis.size, basis.size), dtype=complex) for _ in range(conn.p)]
    for (i, a) in conn.terms:
        modes, vals = conn.coefficients((i, a), sigma)
        for mode, c in zip(modes, vals):
            rows, cols = shift_pairs(basis, tuple(mode.tolist()))
            out[a][rows, cols] += basis.indices[rows, i] * c
    return [LinearOperator(basis, M) for M in out]


def build_L(conn: ControlConnection, sigma, phi) -> np.ndarray:
    """Angle Jacobians of the connection, shape ``(p, m, m)``.

    ``L[alpha, k, i] = d Lambda^k_alpha / d phi^i``.
    """
    sigma = conn._check_sigma(sigma)
    phi = conn._check_phi(phi)
    out = np.zeros((conn.p, conn.m, conn.m))
    for (k, a) in conn.terms:
        f = conn.series(k, a, sigma)
        for i in range(conn.m):
            out[a, k, i] = _real_value(fourier_derivative(f, i), phi)
    return out


def _real_value(f: FourierSeries, phi: np.ndarray) -> float:
    if not f.coeffs:
        return 0.0
    z = np.exp(1j * (f.modes_array() @ phi)) @ f.values_array()
    return float(z.real)

