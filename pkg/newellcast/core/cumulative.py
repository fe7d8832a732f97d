"""Conversions between interval flows and cumulative count curves"""

from typing import List

import numpy as np

from ..errors import ValidationError
from .models import CumulativeCurve, DetectorSeries


def cumulative_from_flows(series: DetectorSeries) -> CumulativeCurve:
    """Running sum of interval flows, starting from 0 at t0"""
    counts = np.concatenate([[0.0], np.cumsum(series.flow)])
    return CumulativeCurve(t0=series.t0, dt=series.dt, counts=counts)


def flows_from_cumulative(curve: CumulativeCurve) -> List[float]:
    """Interval flows as differences of consecutive knots"""
    if len(curve) < 2:
        raise ValidationError("counts", "need at least 2 knots to difference")
    return np.diff(curve.counts).tolist()


def eval_cumulative(curve: CumulativeCurve, t: float) -> float:
    """Linear interpolation between knots, clamped outside the curve's span"""
    return float(np.interp(t, curve.times, curve.counts))


def eval_cumulative_many(curve: CumulativeCurve, times: np.ndarray) -> np.ndarray:
    """Vectorised ``eval_cumulative``"""
    return np.interp(np.asarray(times, dtype=float), curve.times, curve.counts)
