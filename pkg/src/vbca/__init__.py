"""Drone-swarm deployment simulator driven by attraction to a central drone
and mutual repulsion between peripherals, with coverage and geometry tools."""

from .coverage import CoverageEstimate, max_volume, swarm_coverage, two_sphere_union_exact, union_volume_mc
from .errors import (
    ConnectivityLossError,
    DegenerateSwarmError,
    ParameterError,
    StateMismatchError,
    UnknownDroneError,
    UnsupportedKError,
    VBCAError,
)
from .forces import KAPPA, cp_to_gains, params_for_cp, run_to_steady_state, step
from .geometry import baseline_coverage, classify_geometry, reference_geometry
from .model import DroneRole, DroneState, SwarmParams, SwarmState, initialize, validate_params
from .topology import is_fully_connected, position_variation, step_metrics

__version__ = "0.1.0"
