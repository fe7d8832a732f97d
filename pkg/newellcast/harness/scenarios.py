"""The eight source/target/transfer layouts over four ordered stations"""

from typing import Dict, Tuple

from ..core import SectionGeometry
from ..errors import ValidationError
from .models import Role, ScenarioSpec

S1, S2, T, X = Role.SOURCE1, Role.SOURCE2, Role.TARGET, Role.TRANSFER

# station roles, upstream to downstream
SCENARIO_ROLES: Dict[str, Tuple[Role, Role, Role, Role]] = {
    "A1": (S1, T, X, S2),
    "A2": (S1, X, T, S2),
    "B1": (S1, S2, T, X),
    "B2": (S1, S2, X, T),
    "C1": (X, T, S1, S2),
    "C2": (T, X, S1, S2),
    "D1": (T, S1, S2, X),
    "D2": (X, S1, S2, T),
}

SCENARIO_IDS = tuple(SCENARIO_ROLES)


def build_scenario(scenario_id: str, geometry: SectionGeometry) -> ScenarioSpec:
    """Assign scenario roles to the stations of a four-station section"""
    if scenario_id not in SCENARIO_ROLES:
        raise ValidationError("scenario", f"unknown scenario {scenario_id!r}, expected one of {SCENARIO_IDS}")
    if len(geometry) != 4:
        raise ValidationError("geometry", f"scenarios need exactly 4 stations, got {len(geometry)}")
    return ScenarioSpec(id=scenario_id, roles=SCENARIO_ROLES[scenario_id], station_ids=tuple(geometry.station_ids))
