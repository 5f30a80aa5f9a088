import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toruscontrol.errors import ConfigurationError, InvalidInputError
from toruscontrol.polynomial import HamiltonianPoly
from toruscontrol.quantization import (
    AffineObservable,
    QuantizationScheme,
    action_operator,
    action_values,
    dirac_residual,
    gauge_conjugate,
    gauge_overlap,
    hamiltonian_operator,
    hamiltonian_spectrum,
    inner_product,
    poisson_bracket,
    quantize,
    quantize_affine,
    twist_reduce,
)
from toruscontrol.quantum import eigenspace_blocks
from toruscontrol.torus import FourierSeries, LinearOperator, StateVector, TruncatedBasis, fourier_eval
from toruscontrol.verify import random_affine


def test_spectrum_substitution():
    H = HamiltonianPoly.from_terms(2, {(2, 0): 1.0, (0, 1): 2.0})
    b = TruncatedBasis(2, 3)
    E = hamiltonian_spectrum(QuantizationScheme([0.3, 0.0]), b, H)
    assert abs(E[b.index_of([2, 1])] - 4.89) < 1e-12


def test_twisted_spectrum_shifts_by_half():
    b = TruncatedBasis(1, 2)
    vals = action_values(QuantizationScheme([0.0], [0.5]), b)[:, 0]
    assert np.array_equal(vals, [-1.5, -0.5, 0.5, 1.5, 2.5])


def test_degeneracy_of_first_action():
    b = TruncatedBasis(2, 3)
    s = QuantizationScheme([0.3, 0.1])
    rep = eigenspace_blocks(s, b, LinearOperator.identity(b))
    assert rep.sizes == [7] * 7


def test_operator_diagonal_equals_spectrum_bitwise():
    H = HamiltonianPoly.from_terms(2, {(3, 0): 0.7, (1, 2): -1.1, (0, 0): 0.25})
    b = TruncatedBasis(2, 3)
    s = QuantizationScheme([0.37, -0.21], [0.5, 0.0])
    D = hamiltonian_operator(s, b, H).matrix
    assert np.array_equal(np.diag(D).real, hamiltonian_spectrum(s, b, H))


def test_cos_times_action_matrix_elements():
    # f = cos(phi) I: entries n/2 -/+ 1/4 next to the diagonal
    b = TruncatedBasis(1, 4, 1)
    A = quantize_affine(QuantizationScheme([0.0]), b, [FourierSeries.cosine((1,))], FourierSeries.zero(1)).matrix
    for n in range(-3, 4):
        j = b.index_of([n])
        assert A[j, b.index_of([n - 1])] == pytest.approx(n / 2 - 0.25)
        assert A[j, b.index_of([n + 1])] == pytest.approx(n / 2 + 0.25)


def test_function_quantizes_to_multiplication():
    b = TruncatedBasis(1, 3, 1)
    f = FourierSeries.sine((1,), 2.0)
    A = quantize(QuantizationScheme([0.4]), b, AffineObservable.function(f)).matrix
    psi = StateVector.character(b, (0,))
    out = StateVector(b, A @ psi.coeff)
    assert out.evaluate([0.8]) == pytest.approx(fourier_eval(f, [0.8]))


def test_action_operator_is_diagonal():
    b = TruncatedBasis(2, 2)
    A = action_operator(QuantizationScheme([0.25, -0.5]), b, 1).matrix
    assert np.array_equal(np.diag(A).real, b.indices[:, 1] + 0.5)
    with pytest.raises(InvalidInputError):
        action_operator(QuantizationScheme([0.25, -0.5]), b, 2)


def test_bracket_sign_convention():
    # {I_1, sin phi} = dI/dI * d(sin)/dphi = +cos phi
    br = poisson_bracket(AffineObservable.action(1, 0), AffineObservable.function(FourierSeries.sine((1,))))
    assert br.b == FourierSeries.cosine((1,))
    assert all(not a.coeffs for a in br.a)


def test_bracket_antisymmetry(rng):
    f, g = random_affine(rng, 2, 1), random_affine(rng, 2, 1)
    s = poisson_bracket(f, g)
    t = poisson_bracket(g, f)
    phi, I = np.array([0.3, 2.0]), np.array([0.7, -1.2])
    assert s(I, phi) == pytest.approx(-t(I, phi))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_dirac_condition_property(seed):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-1, 1, 2)
    b = TruncatedBasis(2, 6, 2)
    f, g = random_affine(rng, 2, 1), random_affine(rng, 2, 1)
    assert dirac_residual(QuantizationScheme(lam), b, f, g) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 0.5]))
def test_quantized_observables_hermitian(seed, eps):
    rng = np.random.default_rng(seed)
    b = TruncatedBasis(2, 5, 2)
    A = quantize(QuantizationScheme(rng.uniform(-1, 1, 2), [eps, 0.0]), b, random_affine(rng, 2, 2)).matrix
    # the affine formula is Hermitian on the whole box, not just the interior
    assert np.max(np.abs(A - A.conj().T)) < 1e-12


def test_support_beyond_margin_rejected(rng):
    b = TruncatedBasis(1, 4, 1)
    with pytest.raises(ConfigurationError):
        quantize(QuantizationScheme([0.0]), b, random_affine(rng, 1, 2))


@pytest.mark.parametrize("d", [(1, 0), (-2, 1), (2, 2)])
def test_gauge_conjugacy_dyadic_exact(d):
    lam = np.array([0.375, -1.25])
    b = TruncatedBasis(2, 3)
    s = QuantizationScheme(lam)
    s2, W = gauge_conjugate(s, b, d)
    assert np.array_equal(s2.lam, lam - np.array(d))
    idx = gauge_overlap(b, d)
    for k in range(2):
        lhs = (W.matrix.conj().T @ action_operator(s, b, k).matrix @ W.matrix)[np.ix_(idx, idx)]
        rhs = action_operator(s2, b, k).matrix[np.ix_(idx, idx)]
        assert np.array_equal(lhs, rhs)


def test_gauge_conjugacy_general_lambda(rng):
    b = TruncatedBasis(2, 3)
    for _ in range(5):
        s = QuantizationScheme(rng.uniform(-2, 2, 2))
        d = tuple(rng.integers(-2, 3, 2))
        s2, W = gauge_conjugate(s, b, d)
        idx = gauge_overlap(b, d)
        lhs = (W.matrix.conj().T @ action_operator(s, b, 0).matrix @ W.matrix)[np.ix_(idx, idx)]
        assert np.max(np.abs(lhs - action_operator(s2, b, 0).matrix[np.ix_(idx, idx)])) < 1e-14


def test_gauge_shift_without_overlap():
    with pytest.raises(ConfigurationError):
        gauge_conjugate(QuantizationScheme([0.0]), TruncatedBasis(1, 1), [3])


def test_twist_equivalence_exact(rng):
    b = TruncatedBasis(2, 2)
    for _ in range(5):
        lam = rng.uniform(-1, 1, 2)
        s = QuantizationScheme(lam, [0.5, 0.0])
        r = QuantizationScheme(lam - np.array([0.5, 0.0]))
        assert twist_reduce(s) == r
        for k in range(2):
            assert np.array_equal(action_operator(s, b, k).matrix, action_operator(r, b, k).matrix)


def test_twist_must_be_half_or_zero():
    with pytest.raises(ConfigurationError):
        QuantizationScheme([0.0], [0.25])


def test_characters_orthonormal():
    b = TruncatedBasis(1, 2)
    u, v = StateVector.character(b, (1,)), StateVector.character(b, (-1,))
    assert inner_product(u, u) == 1.0 and inner_product(u, v) == 0.0


def test_affine_observables_must_be_real():
    with pytest.raises(InvalidInputError):
        AffineObservable.function(FourierSeries(1, {(1,): 1.0}, is_real=False))
