"""Scenario construction, transfer evaluation, metrics and reporting"""

from .models import Location, MetricRow, MetricsReport, Role, ScenarioModel, ScenarioSpec, TrafficState
from .scenarios import SCENARIO_IDS, SCENARIO_ROLES, build_scenario
from .metrics import CONGESTION_SPEED, MapeResult, congestion_share, mape, r2, rmse, state_mask
from .evaluation import (
    check_transfer,
    evaluate,
    evaluate_scenario,
    location_channels,
    metric_rows,
    prediction_trace,
    scenario_dataset,
    train_scenario,
    unsupported_rows,
)
from .sweep import DEFAULT_HORIZONS, horizon_sweep
from .report import format_table, summary_frame, sweep_frame

__all__ = [
    "Location",
    "MetricRow",
    "MetricsReport",
    "Role",
    "ScenarioModel",
    "ScenarioSpec",
    "TrafficState",
    "SCENARIO_IDS",
    "SCENARIO_ROLES",
    "build_scenario",
    "CONGESTION_SPEED",
    "MapeResult",
    "congestion_share",
    "mape",
    "r2",
    "rmse",
    "state_mask",
    "check_transfer",
    "evaluate",
    "evaluate_scenario",
    "location_channels",
    "metric_rows",
    "prediction_trace",
    "scenario_dataset",
    "train_scenario",
    "unsupported_rows",
    "DEFAULT_HORIZONS",
    "horizon_sweep",
    "format_table",
    "summary_frame",
    "sweep_frame",
]
