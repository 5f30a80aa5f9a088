import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toruscontrol.errors import ConfigurationError, InvalidInputError
from toruscontrol.path import (
    FourierLoop,
    circle,
    eval_path,
    is_loop,
    line,
    path_from_record,
    polyline,
    reparametrize,
    time_grid,
)


def test_line_position_and_velocity():
    p = line([0.0, 1.0], [2.0, 3.0])
    pos, vel = eval_path(p, 0.25)
    assert np.allclose(pos, [0.5, 1.5]) and np.allclose(vel, [2.0, 2.0])


def test_polyline_one_sided_velocities():
    p = polyline([[0.0], [1.0], [1.0]], [0.0, 0.5, 1.0])
    assert eval_path(p, 0.5, "left")[1][0] == pytest.approx(2.0)
    assert eval_path(p, 0.5, "right")[1][0] == 0.0
    assert eval_path(p, 0.5)[0][0] == 1.0


def test_loop_closes_exactly():
    loop = FourierLoop(2, 1.0, [0.1, 0.2], [[0.3, 0.0], [0.0, 0.1]], [[0.0, 0.3], [0.05, 0.0]])
    assert np.array_equal(eval_path(loop, 0.0)[0], eval_path(loop, 1.0)[0])
    assert is_loop(loop)
    assert not is_loop(line([0.0], [1.0]))


def test_circle_velocity():
    c = circle([0.0, 0.0], 0.5)
    _, vel = eval_path(c, 0.0)
    assert np.allclose(vel, [0.0, np.pi])


@given(st.floats(0.0, 1.0), st.floats(1.0, 5.0))
def test_reparametrized_position_follows_schedule(t, e):
    c = circle([0.0, 0.0], 0.5)
    r = reparametrize(c, e)
    assert np.allclose(eval_path(r, t)[0], eval_path(c, t**e)[0], atol=1e-12)


def test_reparametrize_composes():
    c = circle([0.0, 0.0], 0.5)
    assert reparametrize(reparametrize(c, 2.0), 1.5).exponent == 3.0
    with pytest.raises(InvalidInputError):
        reparametrize(c, 0.5)


def test_knot_snapping_under_schedule():
    p = polyline([[0.0], [1.0], [0.0]], [0.0, 0.3, 1.0])
    r = reparametrize(p, 3.0)
    tk = r.knot_times()[1]
    assert eval_path(r, tk, "left")[1][0] > 0 and eval_path(r, tk, "right")[1][0] < 0


def test_time_grid_contains_knots():
    p = polyline([[0.0], [1.0], [0.0], [2.0]], [0.0, 0.1, 0.55, 1.0])
    g = time_grid(p, 100)
    for k in p.times:
        assert k in g
    assert g[0] == 0.0 and g[-1] == 1.0 and np.all(np.diff(g) > 0)


def test_params_roundtrip():
    x = np.arange(8.0) / 10
    loop = FourierLoop.from_params(x, 2, 2)
    assert np.array_equal(loop.params(), x)


def test_records_roundtrip():
    for p in (polyline([[0.0, 1.0], [1.0, 2.0], [3.0, 0.0]]), reparametrize(circle([0.1, 0.2], 0.4), 2.0)):
        assert path_from_record(p.to_record()).to_record() == p.to_record()


def test_invalid_paths():
    with pytest.raises(ConfigurationError):
        polyline([[0.0], [1.0]], [0.0, 0.5])
    with pytest.raises(ConfigurationError):
        path_from_record({"kind": "spline", "p": 1})
    with pytest.raises(InvalidInputError):
        eval_path(line([0.0], [1.0]), 1.5)
