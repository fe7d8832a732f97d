"""Godunov-scheme LWR simulator with virtual detectors"""

from .models import Profile, SimConfig, SimOutput
from .godunov import Boundary, cfl_bound, choose_dt, godunov_step, interface_fluxes
from .simulator import run
from .presets import (
    bottleneck_config,
    case_study_config,
    daily_profile,
    evening_bottleneck,
    free_flow_config,
    shock_config,
)

__all__ = [
    "Profile",
    "SimConfig",
    "SimOutput",
    "Boundary",
    "cfl_bound",
    "choose_dt",
    "godunov_step",
    "interface_fluxes",
    "run",
    "bottleneck_config",
    "case_study_config",
    "daily_profile",
    "evening_bottleneck",
    "free_flow_config",
    "shock_config",
]
