"""Fundamental-diagram parameter estimation"""

from .models import SectionParams, StationParams
from .estimation import (
    aggregate_section_params,
    density_series,
    estimate_section_params,
    estimate_station_params,
    fd_scatter,
    screen_intervals,
)

__all__ = [
    "SectionParams",
    "StationParams",
    "aggregate_section_params",
    "density_series",
    "estimate_section_params",
    "estimate_station_params",
    "fd_scatter",
    "screen_intervals",
]
