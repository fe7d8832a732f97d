"""Data models for Newell estimators and feature construction"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np

from ..errors import ValidationError


class Side(Enum):
    """Where a source station sits relative to the location being estimated"""
    SOURCE_UPSTREAM_OF_TARGET = "upstream"
    SOURCE_DOWNSTREAM_OF_TARGET = "downstream"


class FeatureVariant(Enum):
    """Input feature construction"""
    REGULAR = "regular"
    PHYSICS_FF = "physics_ff"
    PHYSICS_FC = "physics_fc"
    HYBRID = "hybrid"

    @property
    def label(self) -> str:
        return {
            FeatureVariant.REGULAR: "Regular",
            FeatureVariant.PHYSICS_FF: "Physics FF",
            FeatureVariant.PHYSICS_FC: "Physics FC",
            FeatureVariant.HYBRID: "Hybrid",
        }[self]


class EstimatorKind(Enum):
    """What a feature channel holds"""
    RAW = "raw"
    FREE_FLOW = "ff"
    CONGESTED = "fc"


@dataclass(frozen=True)
class RelativePosition:
    """Source side and distance to the estimated location (mi)"""
    side: Side
    d: float

    def __post_init__(self) -> None:
        if not self.d > 0:
            raise ValidationError("d", f"must be positive, got {self.d}")

    @property
    def upstream(self) -> bool:
        return self.side is Side.SOURCE_UPSTREAM_OF_TARGET


def relative_position(source_position: float, location_position: float) -> RelativePosition:
    """Relative position of a source with respect to a target or transfer location"""
    side = (Side.SOURCE_UPSTREAM_OF_TARGET if source_position < location_position
            else Side.SOURCE_DOWNSTREAM_OF_TARGET)
    return RelativePosition(side=side, d=abs(location_position - source_position))


@dataclass(frozen=True)
class FeatureTensor:
    """Channels x lag matrix of estimated 5-min flows (veh/interval)"""
    values: np.ndarray
    row_labels: List[Tuple[str, EstimatorKind]] = field(default_factory=list)
    t_end: float = 0.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValidationError("values", "feature tensor must be 2-dimensional")
        if len(self.row_labels) != values.shape[0]:
            raise ValidationError("row_labels", "one label per channel required")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def lag(self) -> int:
        return self.values.shape[1]
