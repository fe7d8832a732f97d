"""Newell shift estimators along free-flow and congested characteristics

Each estimator returns a curve on the input curve's knot grid whose knot at
time t is read off the source curve at a shifted time. Reads outside the
source record clamp to its first/last knot.
"""

import numpy as np

from ..core import CumulativeCurve, eval_cumulative_many
from ..errors import GridMismatchError, ValidationError

SECONDS_PER_HOUR = 3600.0


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise ValidationError(name, f"must be positive, got {value}")


def _shifted(curve: CumulativeCurve, shift_seconds: float, offset: float = 0.0) -> CumulativeCurve:
    counts = eval_cumulative_many(curve, curve.times - shift_seconds) + offset
    return CumulativeCurve(t0=curve.t0, dt=curve.dt, counts=counts)


def ff_shift_downstream(curve_a: CumulativeCurve, d: float, vf: float) -> CumulativeCurve:
    """Counts at a location d mi downstream: N(t - d/vf, A)"""
    _check_positive(d=d, vf=vf)
    return _shifted(curve_a, d / vf * SECONDS_PER_HOUR)


def ff_shift_upstream(curve_a: CumulativeCurve, d: float, vf: float) -> CumulativeCurve:
    """Counts at a location d mi upstream under free flow: N(t + d/vf, A)"""
    _check_positive(d=d, vf=vf)
    return _shifted(curve_a, -d / vf * SECONDS_PER_HOUR)


def congested_shift_upstream(curve_x: CumulativeCurve, d: float, w: float, kj: float) -> CumulativeCurve:
    """Counts at a location d mi upstream under congestion: N(t - d/w, X) + d*kj"""
    _check_positive(d=d, w=w, kj=kj)
    return _shifted(curve_x, d / w * SECONDS_PER_HOUR, d * kj)


def congested_shift_downstream(curve_x: CumulativeCurve, d: float, w: float, kj: float) -> CumulativeCurve:
    """Inverse of the congested estimator: N(t + d/w, X) - d*kj"""
    _check_positive(d=d, w=w, kj=kj)
    return _shifted(curve_x, -d / w * SECONDS_PER_HOUR, -d * kj)


def newell_min(ff: CumulativeCurve, cong: CumulativeCurve) -> CumulativeCurve:
    """Pointwise minimum of free-flow and congested estimates"""
    if not ff.same_grid(cong):
        raise GridMismatchError("free-flow and congested curves are on different grids")
    return CumulativeCurve(t0=ff.t0, dt=ff.dt, counts=np.minimum(ff.counts, cong.counts))
