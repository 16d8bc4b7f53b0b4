"""Lagrangian solver for the approximate free-boundary problem."""
from nsp_lab.solver.run import RunResult, run, snapshot_times
from nsp_lab.solver.scheme import admissible_dt, step
from nsp_lab.solver.state import (
    OMEGA3,
    InitialDataSpec,
    ProfileSpec,
    RadialState,
    boundary_exponent,
    boundary_level,
    build_initial_data,
    gravity,
    hydrostatic_state,
    initial_profile,
    pressure_inverse,
    snapshot_frame,
)

__all__ = (
    "OMEGA3",
    "InitialDataSpec",
    "ProfileSpec",
    "RadialState",
    "RunResult",
    "admissible_dt",
    "boundary_exponent",
    "boundary_level",
    "build_initial_data",
    "gravity",
    "hydrostatic_state",
    "initial_profile",
    "pressure_inverse",
    "run",
    "snapshot_frame",
    "snapshot_times",
    "step",
)
