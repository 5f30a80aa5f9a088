import copy
import json

import pytest

from toruscontrol.config import bundled_config_path, build_config, load_config
from toruscontrol.errors import ConfigurationError


@pytest.fixture
def doc():
    with open(bundled_config_path("default")) as fh:
        return json.load(fh)


@pytest.mark.parametrize("name", ["default", "flat-loop", "spectrum"])
def test_bundled_configs_load(name):
    cfg = load_config(bundled_config_path(name))
    assert cfg.run["steps"] >= 1 and len(cfg.digest) == 64


def test_overrides_and_defaults(doc):
    cfg = build_config(doc, {"steps": 17, "seed": None})
    assert cfg.run["steps"] == 17 and cfg.run["seed"] == 0 and cfg.run["format"] == "csv"
    assert cfg.synthesis["restarts"] == 8


def test_digest_ignores_output_directory(doc):
    a = build_config(doc, {"out": "x"})
    b = build_config(doc, {"out": "y"})
    c = build_config(doc, {"steps": 3})
    assert a.digest == b.digest != c.digest


def _error_field(doc):
    with pytest.raises(ConfigurationError) as exc:
        build_config(doc)
    return exc.value.field


def test_schema_errors_carry_field_path(doc):
    bad = copy.deepcopy(doc)
    bad["system"]["n_max"] = "three"
    assert _error_field(bad) == "system.n_max"
    bad = copy.deepcopy(doc)
    bad["connection"]["terms"][1]["poly"][0]["coeff"] = "x"
    assert _error_field(bad) == "connection.terms.1.poly.0.coeff"
    bad = copy.deepcopy(doc)
    bad["surprise"] = 1
    assert _error_field(bad) == "<root>"


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d["system"].update(margin=4), "system.margin"),
        (lambda d: d["system"].update({"lambda": [0.0]}), "system.lambda"),
        (lambda d: d["connection"]["terms"][0].update(mode=[0, 1, 0]), "connection.terms.0.mode"),
        (lambda d: d["connection"]["terms"][0].update(i=2), "connection.terms.0.i"),
        (lambda d: d["connection"]["terms"][0]["poly"][0].update(powers=[0]), "connection.terms.0.poly.0.powers"),
        (lambda d: d["path"].update(center=[0.0]), "path.center"),
        (lambda d: d["path"].update(p=3), "path.p"),
        (lambda d: d["hamiltonian"]["terms"][0].update(powers=[1]), "hamiltonian.terms.0.powers"),
        (lambda d: d["initial_state"].update(I=[1.0]), "initial_state.I"),
        (lambda d: d["system"].update(twist=[0.25, 0]), "system.twist.0"),
    ],
)
def test_cross_field_checks(doc, mutate, field):
    bad = copy.deepcopy(doc)
    mutate(bad)
    assert _error_field(bad) == field


def test_reality_reject_policy(doc):
    bad = copy.deepcopy(doc)
    bad["connection"]["reality"] = "reject"
    assert _error_field(bad) == "connection.terms"


def test_unreadable_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(ConfigurationError) as exc:
        load_config(p)
    assert exc.value.field == "<file>"
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")
