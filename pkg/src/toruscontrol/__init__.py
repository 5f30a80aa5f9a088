"""Classical and quantum holonomy control on action-angle tori."""

from .classical import Trajectory, action_transport, angle_mode_evolution, integrate_direct
from .connection import ControlConnection, build_L, build_M, eval_lambda
from .config import RunConfig, bundled_config_path, load_config
from .errors import ConfigurationError, DivergenceError, InvalidInputError
from .path import FourierLoop, PiecewiseLinearPath, circle, eval_path, line, polyline, reparametrize
from .polynomial import HamiltonianPoly, Polynomial
from .quantization import AffineObservable, QuantizationScheme, hamiltonian_spectrum, quantize, quantize_affine
from .quantum import build_delta, full_evolution, holonomy_block, holonomy_operator
from .synthesis import SynthesisProblem, holonomy_objective, plant_loop, synthesize_loop
from .torus import ActionAngleState, FourierSeries, LinearOperator, StateVector, TruncatedBasis, enumerate_basis

__version__ = "0.1.0"
