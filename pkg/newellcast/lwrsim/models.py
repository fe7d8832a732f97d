"""Data models for the LWR simulator"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..core import CumulativeCurve, DetectorSeries, TriangularFD
from ..errors import ValidationError

DEFAULT_EPOCH = 1625097600.0  # 2021-07-01T00:00:00Z


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear boundary profile in veh/h over simulation seconds

    Values are held constant before the first and after the last knot.
    """
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or len(times) == 0:
            raise ValidationError("profile", "times and values must be equal-length 1-d sequences")
        if np.any(np.diff(times) <= 0):
            raise ValidationError("profile", "knot times must be strictly increasing")
        if np.any(values < 0) or np.any(np.isnan(values)):
            raise ValidationError("profile", "values must be non-negative")
        if np.isinf(values).any() and not np.isinf(values).all():
            raise ValidationError("profile", "an unbounded profile must be unbounded everywhere")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value: float) -> "Profile":
        return cls(np.array([0.0]), np.array([value]))

    @classmethod
    def unbounded(cls) -> "Profile":
        return cls(np.array([0.0]), np.array([np.inf]))

    def at(self, t: float) -> float:
        if np.isinf(self.values).all():
            return float("inf")
        return float(np.interp(t, self.times, self.values))

    def sample(self, times: np.ndarray) -> np.ndarray:
        if np.isinf(self.values).all():
            return np.full(len(times), np.inf)
        return np.interp(times, self.times, self.values)


@dataclass
class SimConfig:
    """Simulation setup

    Attributes:
        length: Road length (mi)
        dx: Cell size (mi)
        horizon: Simulated duration (s)
        fd: Triangular fundamental diagram
        upstream_demand: Inflow demand profile (veh/h)
        downstream_supply_cap: Outflow cap profile (veh/h)
        initial_density: Per-cell density (veh/mi); scalar broadcasts
        detector_positions: Detector positions (mi)
        detector_ids: Station ids, defaults to S1..Sn
        aggregation: Detector reporting interval (s)
        count_interval: Resolution of exact cumulative counts (s), defaults to aggregation
        seed: Seed for detector noise
        noise: Std of multiplicative Gaussian noise on detector flows
        epoch: Wall-clock time of t = 0, seconds from the Unix epoch
    """
    length: float
    dx: float
    horizon: float
    fd: TriangularFD
    upstream_demand: Profile
    downstream_supply_cap: Profile = field(default_factory=Profile.unbounded)
    initial_density: Sequence[float] | float = 0.0
    detector_positions: Sequence[float] = field(default_factory=list)
    detector_ids: Optional[Sequence[str]] = None
    aggregation: float = 300.0
    count_interval: Optional[float] = None
    seed: int = 0
    noise: float = 0.0
    epoch: float = DEFAULT_EPOCH

    def __post_init__(self) -> None:
        if not self.dx > 0:
            raise ValidationError("dx", f"must be positive, got {self.dx}")
        if not self.length >= self.dx:
            raise ValidationError("length", "must cover at least one cell")
        if not self.horizon > 0:
            raise ValidationError("horizon", f"must be positive, got {self.horizon}")
        if not self.aggregation > 0:
            raise ValidationError("aggregation", f"must be positive, got {self.aggregation}")
        if self.noise < 0:
            raise ValidationError("noise", "must be non-negative")
        for x in self.detector_positions:
            if not 0.0 <= x <= self.length:
                raise ValidationError("detector_positions", f"{x} lies outside [0, {self.length}]")
        if self.detector_ids is not None and len(self.detector_ids) != len(self.detector_positions):
            raise ValidationError("detector_ids", "one id per detector position")

    @property
    def n_cells(self) -> int:
        return int(round(self.length / self.dx))

    @property
    def station_ids(self) -> List[str]:
        if self.detector_ids is not None:
            return list(self.detector_ids)
        return [f"S{i + 1}" for i in range(len(self.detector_positions))]

    def initial_densities(self) -> np.ndarray:
        density = np.asarray(self.initial_density, dtype=float)
        if density.ndim == 0:
            return np.full(self.n_cells, float(density))
        if density.shape != (self.n_cells,):
            raise ValidationError("initial_density", f"expected {self.n_cells} cells, got {density.shape}")
        return density.copy()


@dataclass
class SimOutput:
    """Simulation results

    Attributes:
        density: Cell densities sampled at every aggregation boundary (cells x windows+1)
        detectors: Reported detector series keyed by station id
        cumulative: Exact (noise-free) cumulative counts per station on the count grid
        dt: Simulation time step (s)
        inflow: Total vehicles entered at the upstream boundary
        outflow: Total vehicles left at the downstream boundary
        initial_vehicles: Vehicles on the road at t = 0
        final_vehicles: Vehicles on the road at the end
    """
    density: np.ndarray
    detectors: Dict[str, DetectorSeries]
    cumulative: Dict[str, CumulativeCurve]
    dt: float
    inflow: float
    outflow: float
    initial_vehicles: float
    final_vehicles: float

    @property
    def conservation_error(self) -> float:
        """Relative mismatch of inflow - outflow against the change on the road"""
        change = self.final_vehicles - self.initial_vehicles
        balance = self.inflow - self.outflow
        scale = max(abs(self.inflow), abs(self.outflow), abs(self.initial_vehicles), 1.0)
        return abs(balance - change) / scale

    def series(self) -> List[DetectorSeries]:
        return list(self.detectors.values())
