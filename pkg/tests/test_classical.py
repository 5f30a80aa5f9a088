import numpy as np
import pytest

from toruscontrol.classical import (
    Trajectory,
    action_transport,
    angle_mode_evolution,
    canonical_shift,
    control_rhs,
    integrate_direct,
)
from toruscontrol.connection import ControlConnection
from toruscontrol.errors import ConfigurationError, DivergenceError, InvalidInputError
from toruscontrol.path import line, polyline, reparametrize
from toruscontrol.polynomial import HamiltonianPoly
from toruscontrol.torus import ActionAngleState, FourierSeries, TruncatedBasis

# Lambda = 0.3 cos(phi) along sigma: 0 -> 1 from (I, phi) = (1, 0) integrates in
# closed form: phi = gd(0.3 sigma) and I = cosh(0.3 sigma).
PHI_EXACT = 2.0 * np.arctan(np.tanh(0.15))
I_EXACT = np.cosh(0.3)


def test_closed_form_values_frozen():
    assert PHI_EXACT == pytest.approx(0.29559868, abs=1e-8)
    assert I_EXACT == pytest.approx(1.04533851, abs=1e-8)


def test_direct_integration_matches_closed_form(cos_connection, unit_line):
    traj = integrate_direct(ActionAngleState([1.0], [0.0]), cos_connection, unit_line, steps=200)
    assert traj.final.phi[0] == pytest.approx(PHI_EXACT, abs=1e-10)
    assert traj.final.I[0] == pytest.approx(I_EXACT, abs=1e-10)


def test_rk4_order(cos_connection, unit_line):
    errs = []
    for n in (10, 20, 40):
        f = integrate_direct(ActionAngleState([1.0], [0.0]), cos_connection, unit_line, steps=n).final
        errs.append(max(abs(f.phi[0] - PHI_EXACT), abs(f.I[0] - I_EXACT)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((rates > 3.5) & (rates < 4.5))


def test_rhs_formula(loop_connection):
    s = ActionAngleState([2.0], [0.7])
    H = HamiltonianPoly.from_terms(1, {(2,): 0.5})
    dI, dphi = control_rhs(s, loop_connection, [0.4, 0.0], [1.0, 2.0], H)
    lam0, lam1 = 0.3 * np.cos(0.7), (0.2 + 0.12) * np.sin(0.7)
    dlam0, dlam1 = -0.3 * np.sin(0.7), (0.2 + 0.12) * np.cos(0.7)
    assert dI[0] == pytest.approx(-2.0 * (dlam0 * 1.0 + dlam1 * 2.0))
    assert dphi[0] == pytest.approx(2.0 + lam0 + 2.0 * lam1)


def test_angle_independent_connection_only_shifts_angles():
    conn = ControlConnection.from_series(2, 1, {(1, 0): FourierSeries.constant(2, 0.5)})
    traj = integrate_direct(ActionAngleState([1.0, 3.0], [0.0, 0.0]), conn, line([0.0], [2.0]), steps=10)
    assert np.allclose(traj.final.I, [1.0, 3.0])
    assert np.allclose(traj.final.phi, [0.0, 1.0])


def test_divergence_reports_step():
    conn = ControlConnection.from_series(1, 1, {(0, 0): FourierSeries.cosine((1,), 1e200)})
    with pytest.raises(DivergenceError) as exc:
        integrate_direct(ActionAngleState([1e200], [0.5]), conn, line([0.0], [1.0]), steps=4)
    assert exc.value.step is not None


def test_transport_matches_direct(cos_connection, unit_line):
    traj = integrate_direct(ActionAngleState([1.0], [0.0]), cos_connection, unit_line, steps=2000)
    U = action_transport(cos_connection, unit_line, traj, 2000)
    assert U[0, 0] == pytest.approx(I_EXACT, abs=1e-6)


def test_transport_two_dimensional():
    # both angles couple, so the transposed Jacobian matters
    f = FourierSeries(2, {(1, 1): 0.1 - 0.05j, (-1, -1): 0.1 + 0.05j, (1, 0): 0.08, (-1, 0): 0.08}, True)
    conn = ControlConnection.from_series(2, 2, {(0, 0): f, (1, 1): FourierSeries.sine((0, 1), 0.2)})
    path = polyline([[0.0, 0.0], [1.0, 0.5], [0.2, 1.0]])
    s0 = ActionAngleState([1.0, 2.0], [0.3, 1.0])
    traj = integrate_direct(s0, conn, path, steps=2000)
    U = action_transport(conn, path, traj, 2000)
    assert np.allclose(U @ s0.I, traj.final.I, atol=1e-6)


def test_transport_rejects_foreign_trajectory(cos_connection, unit_line):
    traj = integrate_direct(ActionAngleState([1.0], [0.0]), cos_connection, unit_line, steps=20)
    with pytest.raises(InvalidInputError):
        action_transport(cos_connection, line([0.0], [2.0]), traj, 20)


@pytest.mark.parametrize("phi0", [0.0, 1.3, 4.0])
def test_angle_modes_follow_characteristics(cos_connection, unit_line, phi0):
    b = TruncatedBasis(1, 24, 1)
    U = angle_mode_evolution(cos_connection, unit_line, b, 1000).matrix
    traj = integrate_direct(ActionAngleState([1.0], [phi0]), cos_connection, unit_line, steps=1000)
    psi = U @ np.exp(1j * b.indices[:, 0] * phi0)
    for n in (1, 2, -3):
        assert psi[b.index_of([n])] == pytest.approx(np.exp(1j * n * traj.final.phi[0]), abs=1e-6)


def test_angle_modes_non_even_connection():
    # sine modes make the generator complex; rows must still follow the flow
    f = FourierSeries.sine((1,), 0.25) + FourierSeries.cosine((2,), 0.1)
    conn = ControlConnection.from_series(1, 1, {(0, 0): f})
    path = line([0.0], [1.0])
    b = TruncatedBasis(1, 24, 2)
    U = angle_mode_evolution(conn, path, b, 500, method="magnus4").matrix
    traj = integrate_direct(ActionAngleState([1.0], [2.0]), conn, path, steps=1000)
    psi = U @ np.exp(1j * b.indices[:, 0] * 2.0)
    assert psi[b.index_of([1])] == pytest.approx(np.exp(1j * traj.final.phi[0]), abs=1e-8)


def test_angle_modes_need_margin(cos_connection, unit_line):
    with pytest.raises(ConfigurationError):
        angle_mode_evolution(cos_connection, unit_line, TruncatedBasis(1, 4, 0), 10)


def test_classical_reparametrization_invariance(loop_connection, small_loop):
    s0 = ActionAngleState([1.0], [0.4])
    a = integrate_direct(s0, loop_connection, small_loop, steps=2000).final
    b = integrate_direct(s0, loop_connection, reparametrize(small_loop, 3.0), steps=2000).final
    assert abs(a.I[0] - b.I[0]) < 1e-8 and abs(np.angle(np.exp(1j * (a.phi[0] - b.phi[0])))) < 1e-8


def test_canonical_shift():
    H = HamiltonianPoly.from_terms(2, {(2, 0): 0.5, (0, 1): 1.0})
    s = canonical_shift(ActionAngleState([2.0, 5.0], [0.0, 0.0]), 0.5, H)
    assert np.allclose(s.phi, [1.0, 0.5]) and np.array_equal(s.I, [2.0, 5.0])


def test_trajectory_csv_header(cos_connection, unit_line):
    traj = integrate_direct(ActionAngleState([1.0], [0.0]), cos_connection, unit_line, steps=4)
    text = traj.to_csv(header_comment="x=1")
    lines = text.splitlines()
    assert lines[0] == "# x=1" and lines[1] == "t,I_1,phi_1" and len(lines) == 7


def test_trajectory_validation():
    s = ActionAngleState([1.0], [0.0])
    with pytest.raises(InvalidInputError):
        Trajectory([0.0, 0.0], [s, s])
