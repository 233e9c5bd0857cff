"""twat-robodyn: dynamics of open kinematic chains with time-dependent inertial parameters."""
# this_file: src/twat_robodyn/__init__.py

try:
    from .__version__ import __version__
except ImportError:  # pragma: no cover - source tree without the VCS hook
    from importlib.metadata import PackageNotFoundError, version

    try:
        __version__ = version("twat-robodyn")
    except PackageNotFoundError:
        __version__ = "0.1.0"

from twat_robodyn.__main__ import main as cli_main

from twat_robodyn.bounds import (
    BoundCertificate,
    certify,
    corollary_report,
    inertia_rate_entry_bound,
    lower_bound,
    q_norm_check,
    rate_bound,
    unit_ball_witness,
    upper_bound,
)
from twat_robodyn.config import Config, load_config, parse_config
from twat_robodyn.dynamics import (
    DynamicsTerms,
    ModelVariant,
    assemble,
    coriolis,
    forward_dynamics,
    gravity,
    h_matrix,
    lagrangian_oracle,
    mass_matrix,
    regressor,
)
from twat_robodyn.errors import (
    ConfigError,
    InternalConsistencyError,
    InvalidInputError,
    NumericFailureError,
    PropertySuiteError,
    RobodynError,
    SingularMassMatrixError,
    UnsupportedChainError,
)
from twat_robodyn.inertial import InertialParams, ParamTrajectory, check_consistency, pseudo_inertia
from twat_robodyn.kinematics import Chain, Joint, JointKind, forward_map, jacobian, spectral_scan
from twat_robodyn.particles import Particle, ParticleCloud, flow_state, sample_trajectory
from twat_robodyn.simulator import Scenario, State, Trajectory, run, step
from twat_robodyn.verify import run_property_suite


def main() -> None:
    """CLI entry point for the twat robodyn plugin."""
    cli_main()


__all__ = [
    "BoundCertificate",
    "Chain",
    "Config",
    "ConfigError",
    "DynamicsTerms",
    "InertialParams",
    "InternalConsistencyError",
    "InvalidInputError",
    "Joint",
    "JointKind",
    "ModelVariant",
    "NumericFailureError",
    "ParamTrajectory",
    "Particle",
    "ParticleCloud",
    "PropertySuiteError",
    "RobodynError",
    "Scenario",
    "SingularMassMatrixError",
    "State",
    "Trajectory",
    "UnsupportedChainError",
    "__version__",
    "assemble",
    "certify",
    "check_consistency",
    "coriolis",
    "corollary_report",
    "flow_state",
    "forward_dynamics",
    "forward_map",
    "gravity",
    "h_matrix",
    "inertia_rate_entry_bound",
    "jacobian",
    "lagrangian_oracle",
    "load_config",
    "lower_bound",
    "main",
    "mass_matrix",
    "parse_config",
    "pseudo_inertia",
    "q_norm_check",
    "rate_bound",
    "regressor",
    "run",
    "run_property_suite",
    "sample_trajectory",
    "spectral_scan",
    "step",
    "unit_ball_witness",
    "upper_bound",
]
