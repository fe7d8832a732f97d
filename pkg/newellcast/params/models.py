"""Data models for estimated traffic parameters"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from ..core import TriangularFD
from ..errors import ValidationError


@dataclass(frozen=True)
class StationParams:
    """Parameter estimates for a single station"""
    station_id: str
    vf_hat: float
    qc_hat: float
    kc_hat: float

    def __post_init__(self) -> None:
        if not self.vf_hat > 0:
            raise ValidationError("vf_hat", f"must be positive, got {self.vf_hat}")
        if not np.isclose(self.kc_hat, self.qc_hat / self.vf_hat, rtol=1e-9):
            raise ValidationError("kc_hat", "must equal qc_hat / vf_hat")


@dataclass(frozen=True)
class SectionParams:
    """Section-wide diagram built from mean station estimates"""
    fd: TriangularFD
    per_station: List[StationParams] = field(default_factory=list)
    w_assumed: float = 14.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fd": self.fd.to_dict(),
            "w_assumed": self.w_assumed,
            "per_station": [
                {"station_id": s.station_id, "vf_hat": s.vf_hat, "qc_hat": s.qc_hat, "kc_hat": s.kc_hat}
                for s in self.per_station
            ],
        }
