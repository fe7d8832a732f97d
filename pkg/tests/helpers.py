"""Shared builders for test data"""

from typing import Optional, Sequence

import numpy as np

from newellcast.core import DetectorSeries

T0 = 1625097600.0


def series(flows: Sequence[float], station_id: str = "S1", position: float = 0.0,
           speed: Optional[Sequence[float]] = None, occupancy: Optional[Sequence[float]] = None,
           t0: float = T0) -> DetectorSeries:
    flows = np.asarray(flows, dtype=float)
    speed = np.full(len(flows), 60.0) if speed is None else speed
    occupancy = np.full(len(flows), 0.1) if occupancy is None else occupancy
    return DetectorSeries(station_id=station_id, position=position, t0=t0, flow=flows,
                          occupancy=occupancy, speed=speed)
