"""Macroscopic traffic types and fundamental-diagram algebra"""

from .models import (
    RECORD_INTERVAL,
    CumulativeCurve,
    DetectorSeries,
    SectionGeometry,
    TriangularFD,
    large_section,
    small_section,
)
from .fundamental import demand, flow_at_density, make_triangular_fd, supply
from .cumulative import (
    cumulative_from_flows,
    eval_cumulative,
    eval_cumulative_many,
    flows_from_cumulative,
)
from .alignment import align_series

__all__ = [
    "RECORD_INTERVAL",
    "CumulativeCurve",
    "DetectorSeries",
    "SectionGeometry",
    "TriangularFD",
    "large_section",
    "small_section",
    "make_triangular_fd",
    "flow_at_density",
    "demand",
    "supply",
    "cumulative_from_flows",
    "flows_from_cumulative",
    "eval_cumulative",
    "eval_cumulative_many",
    "align_series",
]
