"""Checks that several stations' series can be combined interval by interval"""

from typing import Dict, Sequence

import numpy as np

from ..errors import ValidationError
from .models import DetectorSeries


def align_series(series: Sequence[DetectorSeries]) -> Dict[str, DetectorSeries]:
    """Verify shared t0, dt and length; return the series keyed by station id"""
    if not series:
        raise ValidationError("series", "no detector series given")
    first = series[0]
    for other in series[1:]:
        if not np.isclose(other.dt, first.dt):
            raise ValidationError("dt", f"{other.station_id} uses dt={other.dt}, expected {first.dt}")
        if not np.isclose(other.t0, first.t0, rtol=0, atol=1e-6):
            raise ValidationError("t0", f"{other.station_id} starts at a different time")
        if len(other) != len(first):
            raise ValidationError("records", f"{other.station_id} has {len(other)} records, expected {len(first)}")
    keyed = {s.station_id: s for s in series}
    if len(keyed) != len(series):
        raise ValidationError("station_id", "duplicate station ids")
    return keyed
