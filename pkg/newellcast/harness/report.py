"""Tables shaped like the published result tables"""

from typing import Dict, List, Tuple

import pandas as pd

from ..errors import ValidationError
from ..newell import FeatureVariant
from .models import Location, MetricRow, MetricsReport, TrafficState
from .scenarios import SCENARIO_IDS

METRICS = ("rmse", "mape", "r2")
VARIANT_COLUMNS = [v.label for v in FeatureVariant]
DASH = "-"


def _cell(row: MetricRow, metric: str) -> str:
    value = getattr(row, metric)
    if not row.supported or value is None:
        return DASH
    return f"{value:.4f}"


def _order(key: Tuple[str, str, str]) -> Tuple[int, int, int]:
    scenario, location, state = key
    scenarios = list(SCENARIO_IDS)
    return (
        scenarios.index(scenario) if scenario in scenarios else len(scenarios),
        [loc.value for loc in Location].index(location),
        [s.value for s in TrafficState].index(state),
    )


def summary_frame(report: MetricsReport, metric: str = "rmse") -> pd.DataFrame:
    """Case x Location x State rows, one column per variant, values as 4-decimal strings"""
    if metric not in METRICS:
        raise ValidationError("metric", f"must be one of {METRICS}")
    cells: Dict[Tuple[str, str, str], Dict[str, str]] = {}
    for row in report.rows:
        key = (row.scenario, row.location, row.state)
        cells.setdefault(key, {}).setdefault(row.variant, _cell(row, metric))
    records: List[Dict[str, str]] = []
    for key in sorted(cells, key=_order):
        scenario, location, state = key
        record = {"Case": scenario, "Location": location, "State": state}
        record.update({variant: cells[key].get(variant, DASH) for variant in VARIANT_COLUMNS})
        records.append(record)
    return pd.DataFrame(records, columns=["Case", "Location", "State", *VARIANT_COLUMNS])


def format_table(report: MetricsReport, metric: str = "rmse") -> str:
    frame = summary_frame(report, metric)
    if frame.empty:
        return "(no results)"
    return frame.to_string(index=False)


def sweep_frame(report: MetricsReport, metric: str = "rmse") -> pd.DataFrame:
    """Variant x Location rows, one column per horizon (in 5-min steps)"""
    if metric not in METRICS:
        raise ValidationError("metric", f"must be one of {METRICS}")
    horizons = sorted({r.horizon for r in report.rows})
    cells: Dict[Tuple[str, str, str], Dict[int, str]] = {}
    for row in report.rows:
        if row.state != TrafficState.COMBINED.value:
            continue
        cells.setdefault((row.scenario, row.variant, row.location), {}).setdefault(row.horizon, _cell(row, metric))
    records = []
    for (scenario, variant, location), values in cells.items():
        record = {"Case": scenario, "Variant": variant, "Location": location}
        record.update({f"{5 * h} min": values.get(h, DASH) for h in horizons})
        records.append(record)
    return pd.DataFrame(records, columns=["Case", "Variant", "Location", *[f"{5 * h} min" for h in horizons]])
