"""Fundamental-diagram parameter estimation from detector data"""

from typing import List, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from ..core import DetectorSeries, TriangularFD
from ..errors import InsufficientDataError, ValidationError
from .models import SectionParams, StationParams

SPEED_FLOOR = 1.0
PERCENTILE = 95.0
MIN_INTERVALS = 100
DEFAULT_W = 14.0
SATURATED_OCCUPANCY = 0.99


def screen_intervals(series: DetectorSeries) -> np.ndarray:
    """Data-quality mask over the records

    Drops records that report flow with zero speed, and records with saturated
    occupancy that still report flow.
    """
    flow, speed, occ = series.flow, series.speed, series.occupancy
    bad = ((flow > 0) & (speed <= 0)) | ((occ >= SATURATED_OCCUPANCY) & (flow > 0))
    if bad.any():
        logger.warning(f"{series.station_id}: screened out {int(bad.sum())} implausible intervals")
    return ~bad


def density_series(series: DetectorSeries, speed_floor: float = SPEED_FLOOR) -> List[float]:
    """Densities k = q/v in veh/mi, skipping intervals with speed <= speed_floor"""
    keep = series.speed > speed_floor
    skipped = int((~keep).sum())
    if skipped:
        logger.warning(f"{series.station_id}: skipped {skipped} intervals with speed <= {speed_floor} mi/h")
    if not keep.any():
        raise InsufficientDataError(f"{series.station_id}: no interval has speed above {speed_floor} mi/h", count=0)
    return (series.hourly_flow[keep] / series.speed[keep]).tolist()


def estimate_station_params(series: DetectorSeries, min_intervals: int = MIN_INTERVALS,
                            percentile: float = PERCENTILE) -> StationParams:
    """Free-flow speed and capacity as high percentiles of speed and hourly flow

    Args:
        series: Detector records for one station
        min_intervals: Minimum number of screened intervals required
        percentile: Percentile applied to both speeds and flows

    Returns:
        StationParams with kc_hat = qc_hat / vf_hat
    """
    mask = screen_intervals(series) if len(series) else np.zeros(0, dtype=bool)
    count = int(mask.sum())
    if count < min_intervals:
        raise InsufficientDataError(
            f"{series.station_id}: {count} usable intervals, need at least {min_intervals}",
            count=count,
        )

    vf_hat = float(np.percentile(series.speed[mask], percentile, method="linear"))
    qc_hat = float(np.percentile(series.hourly_flow[mask], percentile, method="linear"))
    if not vf_hat > 0:
        raise ValidationError("vf_hat", f"{series.station_id}: percentile speed is {vf_hat}")

    params = StationParams(station_id=series.station_id, vf_hat=vf_hat, qc_hat=qc_hat, kc_hat=qc_hat / vf_hat)
    logger.info(f"{series.station_id}: vf={vf_hat:.2f} mi/h, qc={qc_hat:.1f} veh/h, kc={params.kc_hat:.2f} veh/mi")
    return params


def aggregate_section_params(stations: Sequence[StationParams], w_assumed: float = DEFAULT_W) -> SectionParams:
    """Mean per-station estimates closed into one triangular diagram with fixed w"""
    if not stations:
        raise InsufficientDataError("no station estimates to aggregate", count=0)
    if not w_assumed > 0:
        raise ValidationError("w_assumed", f"must be positive, got {w_assumed}")

    vf = float(np.mean([s.vf_hat for s in stations]))
    kc = float(np.mean([s.kc_hat for s in stations]))
    kj = kc * (1.0 + vf / w_assumed)
    fd = TriangularFD(vf=vf, w=float(w_assumed), kj=kj, kc=kc, qc=kc * vf)
    return SectionParams(fd=fd, per_station=list(stations), w_assumed=float(w_assumed))


def estimate_section_params(series: Sequence[DetectorSeries], w_assumed: float = DEFAULT_W,
                            min_intervals: int = MIN_INTERVALS) -> SectionParams:
    """Per-station estimation followed by section aggregation"""
    stations = [estimate_station_params(s, min_intervals=min_intervals) for s in series]
    section = aggregate_section_params(stations, w_assumed)
    fd = section.fd
    logger.info(f"Section FD: vf={fd.vf:.2f}, w={fd.w:.2f}, kj={fd.kj:.2f}, kc={fd.kc:.2f}, qc={fd.qc:.1f}")
    return section


def fd_scatter(series: DetectorSeries, speed_floor: float = SPEED_FLOOR) -> pd.DataFrame:
    """Flow-density points for plotting one station's fundamental diagram"""
    keep = series.speed > speed_floor
    return pd.DataFrame({
        "station_id": series.station_id,
        "timestamp": series.timestamps()[keep],
        "density_veh_per_mi": series.hourly_flow[keep] / series.speed[keep],
        "flow_veh_per_h": series.hourly_flow[keep],
        "speed_mph": series.speed[keep],
    })
