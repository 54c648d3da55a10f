"""Discrete-velocity kinetic simulator for rescaled hard-sphere gas dynamics
in a channel with Maxwell accommodation walls, plus a verification harness
for the small-Knudsen hydrodynamic limit."""

from .velocity import VelocityGrid, build_grid, maxwellian, moment, half_flux
from .collision import (CollisionMatrices, SphereRule, apply_Gamma, apply_L,
                        build_matrices, q_full, transport_coefficients)
from .geometry import Domain, bounce_census, exit_time, flight_jacobian, flow, \
    specular_reflect, stretch
from .macro import MacroFields, Projector, coercivity_check, limit_residuals, \
    project_P
from .insf import ChannelSolution, channel_temperature, channel_velocity
from .solver import ChannelKinetics, KineticState, SpatialMesh
from .wall import WallModel, apply_maxwell_bc_absolute, apply_P_gamma, \
    apply_Q1, apply_Q2, build_fw, build_wall_model, expand_wall_maxwellian
from .harness import RunConfig, load_config, run_sweep, run_verify

__version__ = "0.1.0"
