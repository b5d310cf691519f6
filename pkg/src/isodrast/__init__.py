"""Symplectic structures on weighted loops in R^{2n} and on momentum-weighted metrics."""

from .ambient import AmbientSpace, HamiltonianFn, omega, poisson_bracket_ambient
from .errors import (
    DegenerateMetric,
    ExactnessError,
    InvariantError,
    IsodrastError,
    ParseError,
    PositivityError,
    SchemaError,
    SignatureBreach,
    UnknownSuite,
)
from .flows import action_integral, flow_loop, isodrast_drift
from .loops import CircleDiffeo, LoopEmbedding, TangentVector, Weighting, moser_normalize, reparametrize
from .metrics import MetricField, MetricTangent, MomentumField, omega_metric, theta_metric, xi_Fr
from .moment_map import equivariance_residual, kks_pairing, moment_condition_residual, moment_eval
from .pairings import (
    PairingReport,
    omega_donaldson,
    omega_fourier,
    omega_momentum,
    omega_reduced,
    omega_weighted,
    theta_momentum,
)
from .poisson import IntegralFunctional, bracket, hamiltonian_field_of

__version__ = "0.1.0"

__all__ = [
    "AmbientSpace",
    "CircleDiffeo",
    "DegenerateMetric",
    "ExactnessError",
    "HamiltonianFn",
    "IntegralFunctional",
    "InvariantError",
    "IsodrastError",
    "LoopEmbedding",
    "MetricField",
    "MetricTangent",
    "MomentumField",
    "PairingReport",
    "ParseError",
    "PositivityError",
    "SchemaError",
    "SignatureBreach",
    "TangentVector",
    "UnknownSuite",
    "Weighting",
    "action_integral",
    "bracket",
    "equivariance_residual",
    "flow_loop",
    "hamiltonian_field_of",
    "isodrast_drift",
    "kks_pairing",
    "moment_condition_residual",
    "moment_eval",
    "moser_normalize",
    "omega",
    "omega_donaldson",
    "omega_fourier",
    "omega_metric",
    "omega_momentum",
    "omega_reduced",
    "omega_weighted",
    "poisson_bracket_ambient",
    "reparametrize",
    "theta_metric",
    "theta_momentum",
    "xi_Fr",
]
