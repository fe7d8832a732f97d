"""Data models for scenarios, metrics and trained scenario models"""

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from ..newell import FeatureVariant
from ..nn import TrainedModel, TrainHistory


class Role(Enum):
    """Part a station plays in a scenario"""
    SOURCE1 = "Source1"
    SOURCE2 = "Source2"
    TARGET = "Target"
    TRANSFER = "Transfer"


class Location(Enum):
    """Where a model is evaluated"""
    TARGET = "Target"
    TRANSFER = "Transfer"


class TrafficState(Enum):
    COMBINED = "Combined"
    FREE_FLOW = "FreeFlow"
    CONGESTION = "Congestion"


@dataclass(frozen=True)
class ScenarioSpec:
    """Role assignment over four ordered stations

    Attributes:
        id: Scenario id, e.g. "A1"
        roles: Role of each station, upstream to downstream
        station_ids: Station ids in the same order
    """
    id: str
    roles: Tuple[Role, ...]
    station_ids: Tuple[str, ...]

    @property
    def case(self) -> str:
        return self.id[0]

    def station(self, role: Role) -> str:
        return self.station_ids[self.roles.index(role)]

    @property
    def sources(self) -> Tuple[str, str]:
        return self.station(Role.SOURCE1), self.station(Role.SOURCE2)

    @property
    def target(self) -> str:
        return self.station(Role.TARGET)

    @property
    def transfer(self) -> str:
        return self.station(Role.TRANSFER)

    def location(self, location: Location) -> str:
        return self.target if location is Location.TARGET else self.transfer


@dataclass(frozen=True)
class MetricRow:
    """Errors for one (scenario, location, variant, state, horizon) cell

    Metrics are None when the variant is unsupported at the location or the
    state has no samples; ``r2`` is also None when the observations are constant.
    """
    scenario: str
    location: str
    variant: str
    state: str
    horizon: int = 1
    supported: bool = True
    n: int = 0
    rmse: Optional[float] = None
    mape: Optional[float] = None
    r2: Optional[float] = None
    mape_excluded: int = 0
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MetricsReport:
    rows: List[MetricRow] = field(default_factory=list)

    def extend(self, other: "MetricsReport") -> "MetricsReport":
        self.rows.extend(other.rows)
        return self

    def to_frame(self) -> pd.DataFrame:
        columns = list(MetricRow.__dataclass_fields__)
        return pd.DataFrame([r.to_dict() for r in self.rows], columns=columns)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "MetricsReport":
        rows = []
        for record in frame.to_dict(orient="records"):
            clean = {k: (None if isinstance(v, float) and pd.isna(v) else v) for k, v in record.items()}
            clean["horizon"] = int(clean["horizon"])
            clean["n"] = int(clean["n"])
            clean["mape_excluded"] = int(clean["mape_excluded"])
            clean["seed"] = int(clean["seed"])
            clean["supported"] = bool(clean["supported"])
            rows.append(MetricRow(**clean))
        return cls(rows)

    def select(self, **criteria: Any) -> List[MetricRow]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in criteria.items())]


@dataclass
class ScenarioModel:
    """A predictor trained at a scenario's target station"""
    scenario: ScenarioSpec
    variant: FeatureVariant
    trained: TrainedModel
    history: TrainHistory
    lag: int
    horizon: int = 1
    split: Tuple[float, float, float] = (0.60, 0.15, 0.25)
    seed: int = 0
