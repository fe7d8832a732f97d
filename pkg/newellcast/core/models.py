"""Data models for macroscopic traffic quantities

Units: distance mi, speed mi/h, density veh/mi, flow veh/h. Detector records
carry flow in vehicles per interval; multiply by ``intervals_per_hour`` for
hourly flow. Times are seconds from the Unix epoch (UTC).
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import ValidationError

RECORD_INTERVAL = 300.0
CLOSURE_RTOL = 1e-9


def _frozen_array(values: Sequence[float], name: str) -> np.ndarray:
    array = np.array(values, dtype=float)
    if array.ndim != 1:
        raise ValidationError(name, "expected a one-dimensional sequence")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TriangularFD:
    """Triangular fundamental diagram

    ``w`` is the positive magnitude of the congested wave speed.
    """
    vf: float
    w: float
    kj: float
    kc: float
    qc: float

    def __post_init__(self) -> None:
        for name in ("vf", "w", "kj", "kc", "qc"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, f"must be positive, got {getattr(self, name)}")
        if not self.kc < self.kj:
            raise ValidationError("kc", f"must be below kj={self.kj}, got {self.kc}")
        if not np.isclose(self.qc, self.kc * self.vf, rtol=CLOSURE_RTOL, atol=0.0):
            raise ValidationError("qc", "violates qc = kc * vf")
        if not np.isclose(self.qc, self.w * (self.kj - self.kc), rtol=CLOSURE_RTOL, atol=0.0):
            raise ValidationError("qc", "violates qc = w * (kj - kc)")

    def speed_at_density(self, k: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Equilibrium speed; vf on the free-flow branch including k = 0

        Accepts a scalar or an array of densities.
        """
        density = np.asarray(k, dtype=float)
        speed = np.where(density <= self.kc, self.vf, self.w * (self.kj - density) / np.maximum(density, self.kc))
        return float(speed) if speed.ndim == 0 else speed

    def to_dict(self) -> dict:
        return {"vf": self.vf, "w": self.w, "kj": self.kj, "kc": self.kc, "qc": self.qc}


@dataclass(frozen=True)
class DetectorSeries:
    """Uniformly spaced detector records for one station

    Attributes:
        station_id: Station identifier
        position: Distance along the freeway in mi (increasing downstream)
        t0: Start of the first interval, seconds from the Unix epoch
        flow: Vehicles per interval
        occupancy: Fraction in [0, 1]
        speed: mi/h
        dt: Interval length in seconds
    """
    station_id: str
    position: float
    t0: float
    flow: np.ndarray
    occupancy: np.ndarray
    speed: np.ndarray
    dt: float = RECORD_INTERVAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "flow", _frozen_array(self.flow, "flow"))
        object.__setattr__(self, "occupancy", _frozen_array(self.occupancy, "occupancy"))
        object.__setattr__(self, "speed", _frozen_array(self.speed, "speed"))

        if not self.dt > 0:
            raise ValidationError("dt", f"must be positive, got {self.dt}")
        n = len(self.flow)
        if len(self.occupancy) != n or len(self.speed) != n:
            raise ValidationError("records", "flow, occupancy and speed lengths differ")
        if not (np.all(np.isfinite(self.flow)) and np.all(np.isfinite(self.speed))
                and np.all(np.isfinite(self.occupancy))):
            raise ValidationError("records", "missing or non-finite values")
        if np.any(self.flow < 0):
            raise ValidationError("flow", "must be non-negative")
        if np.any(self.speed < 0):
            raise ValidationError("speed", "must be non-negative")
        if np.any((self.occupancy < 0) | (self.occupancy > 1)):
            raise ValidationError("occupancy", "must lie in [0, 1]")

    def __len__(self) -> int:
        return len(self.flow)

    @property
    def intervals_per_hour(self) -> float:
        return 3600.0 / self.dt

    @property
    def hourly_flow(self) -> np.ndarray:
        """Flow in veh/h"""
        return self.flow * self.intervals_per_hour

    @property
    def t_end(self) -> float:
        """End of the last interval"""
        return self.t0 + len(self) * self.dt

    def timestamps(self) -> pd.DatetimeIndex:
        """Start timestamps of each interval (UTC)"""
        starts = self.t0 + self.dt * np.arange(len(self))
        return pd.to_datetime(starts, unit="s", utc=True)


@dataclass(frozen=True)
class CumulativeCurve:
    """Piecewise-linear cumulative count curve N(t) at a location

    Knot i sits at ``t0 + i * dt``. Curves produced by Newell estimators may be
    negative or non-monotone; only their differences are meaningful.
    """
    t0: float
    dt: float
    counts: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", _frozen_array(self.counts, "counts"))
        if not self.dt > 0:
            raise ValidationError("dt", f"must be positive, got {self.dt}")
        if len(self.counts) == 0:
            raise ValidationError("counts", "a curve needs at least one knot")

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.counts))

    def same_grid(self, other: "CumulativeCurve") -> bool:
        return (len(self) == len(other) and np.isclose(self.t0, other.t0, rtol=0, atol=1e-6)
                and np.isclose(self.dt, other.dt, rtol=0, atol=1e-9))


@dataclass(frozen=True)
class SectionGeometry:
    """Ordered detector stations; traffic flows toward higher positions"""
    stations: Tuple[Tuple[str, float], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        stations = tuple((str(sid), float(pos)) for sid, pos in self.stations)
        object.__setattr__(self, "stations", stations)
        if len(stations) < 2:
            raise ValidationError("stations", "need at least 2 stations")
        positions = [pos for _, pos in stations]
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValidationError("stations", "positions must be strictly increasing")
        ids = [sid for sid, _ in stations]
        if len(set(ids)) != len(ids):
            raise ValidationError("stations", "station ids must be unique")

    @classmethod
    def from_spacings(cls, station_ids: Sequence[str], spacings: Sequence[float],
                      origin: float = 0.0) -> "SectionGeometry":
        """Build a geometry from consecutive inter-station distances"""
        if len(spacings) != len(station_ids) - 1:
            raise ValidationError("spacings", "need one spacing per consecutive pair")
        positions = origin + np.concatenate([[0.0], np.cumsum(spacings)])
        return cls(tuple(zip(station_ids, positions.tolist())))

    @property
    def station_ids(self) -> List[str]:
        return [sid for sid, _ in self.stations]

    def position(self, station_id: str) -> float:
        for sid, pos in self.stations:
            if sid == station_id:
                return pos
        raise ValidationError("station_id", f"unknown station {station_id!r}")

    def __len__(self) -> int:
        return len(self.stations)


# Inter-station distances of the two studied freeway sections (mi)
SMALL_SECTION_SPACINGS = (0.5, 0.3, 0.5)
LARGE_SECTION_SPACINGS = (1.6, 0.6, 0.9)


def small_section(origin: float = 0.5) -> SectionGeometry:
    return SectionGeometry.from_spacings(["S1", "S2", "S3", "S4"], SMALL_SECTION_SPACINGS, origin)


def large_section(origin: float = 0.5) -> SectionGeometry:
    return SectionGeometry.from_spacings(["S1", "S2", "S3", "S4"], LARGE_SECTION_SPACINGS, origin)
