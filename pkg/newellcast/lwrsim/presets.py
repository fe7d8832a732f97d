"""Ready-made simulation setups"""

from typing import List, Optional, Tuple

import numpy as np

from ..core import SectionGeometry, TriangularFD, make_triangular_fd, small_section
from .models import Profile, SimConfig

SECONDS_PER_DAY = 86400.0


def _hours(knots: List[Tuple[float, float]]) -> Profile:
    return Profile(np.array([h * 3600.0 for h, _ in knots]), np.array([v for _, v in knots]))


def free_flow_config(fd: Optional[TriangularFD] = None, horizon: float = 3 * 3600.0) -> SimConfig:
    """3 mi homogeneous road, sub-capacity constant-then-peaking demand, no bottleneck"""
    fd = fd or make_triangular_fd(60.0, 15.0, 150.0)
    base, peak = 0.55 * fd.qc, 0.9 * fd.qc
    demand = _hours([(0.0, base), (0.5, base), (1.0, peak), (1.5, peak), (2.0, base)])
    return SimConfig(
        length=3.0, dx=0.05, horizon=horizon, fd=fd, upstream_demand=demand,
        initial_density=base / fd.vf, detector_positions=[0.5, 1.5, 2.5],
    )


def bottleneck_config(fd: Optional[TriangularFD] = None, horizon: float = 2.5 * 3600.0) -> SimConfig:
    """Sustained downstream bottleneck whose discharge rate varies over time"""
    fd = fd or make_triangular_fd(60.0, 15.0, 150.0)
    inflow = 0.83 * fd.qc
    cap = _hours([(0.0, 0.67 * fd.qc), (0.5, 0.56 * fd.qc), (1.0, 0.78 * fd.qc),
                  (1.5, 0.56 * fd.qc), (2.0, 0.72 * fd.qc), (2.5, 0.61 * fd.qc)])
    return SimConfig(
        length=3.0, dx=0.05, horizon=horizon, fd=fd, upstream_demand=Profile.constant(inflow),
        downstream_supply_cap=cap, initial_density=inflow / fd.vf, detector_positions=[0.5, 1.0, 2.5],
    )


def shock_config(fd: Optional[TriangularFD] = None, horizon: float = 3600.0,
                 count_interval: float = 10.0) -> SimConfig:
    """Empty road filled at constant demand; a bottleneck switches on and a shock sweeps upstream"""
    fd = fd or make_triangular_fd(60.0, 15.0, 150.0)
    onset = 1200.0
    unlimited = 10.0 * fd.qc
    cap = Profile(np.array([0.0, onset, onset + 1.0]), np.array([unlimited, unlimited, 0.44 * fd.qc]))
    return SimConfig(
        length=3.0, dx=0.05, horizon=horizon, fd=fd, upstream_demand=Profile.constant(0.67 * fd.qc),
        downstream_supply_cap=cap, initial_density=0.0, detector_positions=[0.5, 1.5, 2.5],
        count_interval=count_interval,
    )


def daily_profile(days: int, rng: np.random.Generator, capacity: float) -> Profile:
    """Demand with morning and evening peaks; weekends are lighter"""
    times, values = [], []
    for day in range(days):
        weekend = day % 7 in (5, 6)
        scale = 0.7 if weekend else 1.0
        am = rng.uniform(0.78, 0.95) * capacity * scale
        pm = rng.uniform(0.85, 1.02) * capacity * scale
        midday = rng.uniform(0.5, 0.6) * capacity * scale
        night = 0.12 * capacity
        for hour, value in ((0.0, night), (5.0, night), (7.5, am), (9.0, am), (10.5, midday),
                            (15.0, midday), (16.5, pm), (18.5, pm), (20.0, 0.35 * capacity), (23.0, night)):
            times.append(day * SECONDS_PER_DAY + hour * 3600.0)
            values.append(value)
    return Profile(np.array(times), np.array(values))


def evening_bottleneck(days: int, rng: np.random.Generator, capacity: float) -> Profile:
    """Downstream discharge cap that drops during weekday evening peaks"""
    free = 2.0 * capacity
    times, values = [0.0], [free]
    for day in range(days):
        if day % 7 in (5, 6):
            continue
        start = day * SECONDS_PER_DAY + rng.uniform(16.25, 17.0) * 3600.0
        end = start + rng.uniform(1.0, 2.0) * 3600.0
        level = rng.uniform(0.62, 0.8) * capacity
        times += [start, start + 600.0, end, end + 600.0]
        values += [free, level, level, free]
    return Profile(np.array(times), np.array(values))


def case_study_config(days: int = 30, seed: int = 0, noise: float = 0.02,
                      geometry: Optional[SectionGeometry] = None, fd: Optional[TriangularFD] = None) -> SimConfig:
    """Detectors at a section's stations with daily peaks and evening congestion waves

    Defaults to the small studied section. The road extends 0.7 mi past the last
    station so the bottleneck sits downstream of every detector.
    """
    fd = fd or make_triangular_fd(65.0, 14.0, 150.0)
    rng = np.random.default_rng(seed)
    geometry = geometry or small_section(origin=0.5)
    dx = 0.1
    length = float(np.ceil((geometry.stations[-1][1] + 0.7) / dx - 1e-9) * dx)
    night = 0.12 * fd.qc
    return SimConfig(
        length=length,
        dx=dx,
        horizon=days * SECONDS_PER_DAY,
        fd=fd,
        upstream_demand=daily_profile(days, rng, fd.qc),
        downstream_supply_cap=evening_bottleneck(days, rng, fd.qc),
        initial_density=night / fd.vf,
        detector_positions=[pos for _, pos in geometry.stations],
        detector_ids=geometry.station_ids,
        seed=seed,
        noise=noise,
    )
