import json

import numpy as np
import pytest

from toruscontrol.artifacts import (
    config_hash,
    csv_text,
    dumps,
    fmt_float,
    matrix_from_record,
    matrix_record,
    operator_record,
)
from toruscontrol.torus import LinearOperator, TruncatedBasis


@pytest.mark.parametrize(
    "x,s",
    [(1.0, "1.0"), (-2.5, "-2.5"), (0.1, "0.10000000000000001"), (1e300, "1.0000000000000001e+300"), (np.nan, "nan")],
)
def test_fmt_float(x, s):
    assert fmt_float(x) == s


def test_fmt_float_roundtrips(rng):
    for x in rng.standard_normal(100) * 10.0 ** rng.integers(-20, 20, 100):
        assert float(fmt_float(x)) == x


def test_dumps_is_valid_json_and_stable():
    obj = {"b": [1, 2.5, True, None], "a": {"x": np.float64(0.1), "y": np.array([1.0, 2.0])}, "s": "t"}
    text = dumps(obj)
    assert text == dumps(obj)
    back = json.loads(text)
    assert list(back) == ["b", "a", "s"]
    assert back["a"]["x"] == 0.1 and back["a"]["y"] == [1.0, 2.0]


def test_non_finite_written_as_string():
    assert json.loads(dumps({"v": float("inf")}))["v"] == "inf"


def test_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1.5]}) == config_hash({"b": [1.5], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_matrix_roundtrip(rng):
    A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    back = matrix_from_record(json.loads(dumps({"m": matrix_record(A)}))["m"])
    assert np.array_equal(back, A)


def test_operator_record_layout():
    b = TruncatedBasis(1, 1)
    rec = operator_record(LinearOperator.identity(b), "abc")
    assert rec["basis"] == {"m": 1, "n_max": 1, "margin": 0}
    assert rec["matrix"][0][0] == [1.0, 0.0] and len(rec["matrix"]) == 3


def test_csv_has_hash_line():
    text = csv_text(["a", "b"], [[1, 0.5]], "ff")
    assert text.splitlines() == ["# config_sha256=ff", "a,b", "1,0.5"]
