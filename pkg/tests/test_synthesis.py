import logging

import numpy as np
import pytest

from toruscontrol.errors import ConfigurationError, InvalidInputError
from toruscontrol.path import reparametrize
from toruscontrol.quantum import holonomy_block
from toruscontrol.synthesis import (
    PENALTY,
    SynthesisProblem,
    holonomy_objective,
    path_objective,
    plant_loop,
    synthesize_loop,
    unitary_distance,
)


def _problem(cfg, target, **kw):
    return SynthesisProblem(target, cfg.conn, cfg.scheme, cfg.basis, **kw)


def test_identity_target_at_zero_amplitude(default_cfg):
    prob = _problem(default_cfg, np.eye(7), budget=50, steps=50)
    assert holonomy_objective(prob, np.zeros(4)) == 0.0
    res = synthesize_loop(prob)
    assert res.converged and res.residual < 1e-8 and res.evaluations <= 50


def test_self_consistency(default_cfg):
    cfg = default_cfg
    planted = plant_loop(1, 2, seed=11)
    T = holonomy_block(cfg.conn, cfg.scheme, planted, cfg.basis, 100)
    prob = _problem(cfg, T, steps=100)
    assert holonomy_objective(prob, planted.params()) < 1e-10
    assert holonomy_objective(prob, planted.params() + 0.05) > 1e-4


def test_objective_reparametrization_invariant(default_cfg):
    cfg = default_cfg
    planted = plant_loop(1, 2, seed=5, scale=0.4)
    prob = _problem(cfg, np.eye(7), steps=1000, method="magnus4")
    a = path_objective(prob, planted)
    b = path_objective(prob, reparametrize(planted, 3.0))
    assert abs(a - b) < 1e-8


def test_infeasible_target_floor(default_cfg):
    T = 2.0 * np.eye(7)
    floor = unitary_distance(T)
    assert floor == pytest.approx(np.sqrt(7) / 7)
    res = synthesize_loop(_problem(default_cfg, T, budget=120, steps=50, restarts=2))
    assert not res.converged
    assert res.residual >= floor - 1e-6
    assert res.evaluations == 120


def test_unitary_distance_of_unitary_is_zero(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    assert unitary_distance(Q) < 1e-14


def test_deterministic_and_monotone(default_cfg):
    cfg = default_cfg
    T = holonomy_block(cfg.conn, cfg.scheme, plant_loop(1, 2, seed=3), cfg.basis, 40)
    kw = dict(budget=150, steps=40, seed=9, restarts=3)
    a = synthesize_loop(_problem(cfg, T, **kw))
    b = synthesize_loop(_problem(cfg, T, **kw))
    assert np.array_equal(a.path.params(), b.path.params())
    assert a.residual == b.residual and a.evaluations == b.evaluations
    assert np.array_equal(a.history, b.history)
    assert np.all(np.diff(a.history) <= 0)
    assert a.evaluations <= 150


def test_budget_of_one(default_cfg):
    res = synthesize_loop(_problem(default_cfg, 2.0 * np.eye(7), budget=1, steps=20))
    assert res.evaluations == 1 and not res.converged


def test_penalty_for_non_finite(default_cfg, monkeypatch, caplog):
    prob = _problem(default_cfg, np.eye(7), steps=10)
    monkeypatch.setattr(SynthesisProblem, "realize", lambda self, loop: np.full((7, 7), np.nan))
    with caplog.at_level(logging.WARNING, logger="toruscontrol.synthesis"):
        assert holonomy_objective(prob, np.zeros(4)) == PENALTY
    assert "non-finite" in caplog.text


def test_problem_validation(default_cfg):
    with pytest.raises(ConfigurationError):
        _problem(default_cfg, np.eye(5))
    with pytest.raises(ConfigurationError):
        _problem(default_cfg, np.eye(7), K=0)
    with pytest.raises(ConfigurationError):
        _problem(default_cfg, np.eye(7), budget=0)
    with pytest.raises(InvalidInputError):
        holonomy_objective(_problem(default_cfg, np.eye(7)), np.zeros(3))


def test_classical_problem(loop_connection):
    planted = plant_loop(1, 2, seed=4, scale=0.4)
    probe = SynthesisProblem(np.eye(1), loop_connection, None, None, kind="classical", steps=100, phi0=[0.5])
    T = probe.realize(planted)
    assert T.shape == (1, 1) and abs(T[0, 0] - 1.0) > 1e-4
    prob = SynthesisProblem(T, loop_connection, None, None, kind="classical", steps=100, phi0=[0.5])
    assert holonomy_objective(prob, planted.params()) < 1e-10
    ident = SynthesisProblem(np.eye(1), loop_connection, None, None, kind="classical", steps=100, budget=20)
    assert synthesize_loop(ident).converged
