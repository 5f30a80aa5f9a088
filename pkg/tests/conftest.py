import numpy as np
import pytest

from toruscontrol.config import bundled_config_path, load_config
from toruscontrol.connection import ControlConnection
from toruscontrol.path import circle, line
from toruscontrol.quantization import QuantizationScheme
from toruscontrol.torus import FourierSeries, TruncatedBasis

# lines collected by test_acceptance, printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture(scope="session")
def default_cfg():
    return load_config(bundled_config_path("default"))


@pytest.fixture(scope="session")
def flat_cfg():
    return load_config(bundled_config_path("flat-loop"))


@pytest.fixture
def cos_connection():
    """m = 1, p = 1, Lambda = 0.3 cos(phi)."""
    return ControlConnection.from_series(1, 1, {(0, 0): FourierSeries.cosine((1,), 0.3)})


@pytest.fixture
def unit_line():
    return line([0.0], [1.0])


@pytest.fixture
def loop_connection():
    """m = 1, p = 2: Lambda_0 = 0.3 cos(phi), Lambda_1 = (0.2 + 0.3 sigma_0) sin(phi)."""
    return ControlConnection.from_record(
        {
            "m": 1,
            "p": 2,
            "terms": [
                {"i": 0, "alpha": 0, "mode": [1], "poly": [{"powers": [0, 0], "coeff": 0.15}]},
                {
                    "i": 0,
                    "alpha": 1,
                    "mode": [1],
                    "poly": [
                        {"powers": [0, 0], "coeff": 0.0, "coeff_im": -0.1},
                        {"powers": [1, 0], "coeff": 0.0, "coeff_im": -0.15},
                    ],
                },
            ],
        }
    )


@pytest.fixture
def small_loop():
    return circle([0.0, 0.0], 0.5)


@pytest.fixture
def scheme2():
    return QuantizationScheme([0.0, 0.2])


@pytest.fixture
def basis2():
    return TruncatedBasis(2, 3, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
