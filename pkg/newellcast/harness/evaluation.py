"""Training at a scenario's target and evaluation at target and transfer stations"""

from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from ..core import DetectorSeries, SectionGeometry, TriangularFD
from ..errors import UnsupportedVariant, ValidationError
from ..newell import (
    EstimatorKind,
    FeatureVariant,
    RelativePosition,
    build_feature_windows,
    channel_count,
    check_variant,
    estimator_channels,
    relative_position,
)
from ..nn import ARCHITECTURES, TRAINING_PRESETS, TrainConfig, WindowDataset, predict, train
from .metrics import CONGESTION_SPEED, mape, r2, rmse, state_mask
from .models import Location, MetricRow, MetricsReport, ScenarioModel, ScenarioSpec, TrafficState

Data = Dict[str, DetectorSeries]


def _context(scenario: ScenarioSpec, location: Location) -> str:
    return f"Case {scenario.id} {location.value.lower()}"


def source_positions(geometry: SectionGeometry, scenario: ScenarioSpec,
                     location: Location) -> List[RelativePosition]:
    where = geometry.position(scenario.location(location))
    return [relative_position(geometry.position(sid), where) for sid in scenario.sources]


def check_transfer(geometry: SectionGeometry, scenario: ScenarioSpec, variant: FeatureVariant,
                   allow_fc_extension: bool = False) -> int:
    """Raise UnsupportedVariant unless a model trained at the target can also be fed at the transfer station

    The variant must be defined at the target. Hybrid must be defined at both
    locations, and every variant must build the same number of channels at
    both. Returns the channel count.
    """
    target = source_positions(geometry, scenario, Location.TARGET)
    transfer = source_positions(geometry, scenario, Location.TRANSFER)
    check_variant(variant, target, allow_fc_extension, _context(scenario, Location.TARGET))
    if variant is FeatureVariant.HYBRID:
        check_variant(variant, transfer, allow_fc_extension, _context(scenario, Location.TRANSFER))
    n_target, n_transfer = channel_count(variant, target), channel_count(variant, transfer)
    if n_target != n_transfer:
        raise UnsupportedVariant(
            f"{variant.label} builds {n_target} channels at the target but {n_transfer} at the transfer "
            f"station (Case {scenario.id})", f"Case {scenario.id}")
    return n_target


def location_channels(data: Data, geometry: SectionGeometry, scenario: ScenarioSpec, variant: FeatureVariant,
                      fd: TriangularFD, location: Location,
                      allow_fc_extension: bool = False) -> Tuple[List[Tuple[str, EstimatorKind]], np.ndarray]:
    """Estimator channels for the scenario's sources, positioned relative to one location"""
    positions = source_positions(geometry, scenario, location)
    sources = [(data[sid], p) for sid, p in zip(scenario.sources, positions)]
    return estimator_channels(variant, sources, fd, allow_fc_extension, context=_context(scenario, location))


def scenario_dataset(data: Data, geometry: SectionGeometry, scenario: ScenarioSpec, variant: FeatureVariant,
                     fd: TriangularFD, location: Location, lag: int, horizon: int = 1,
                     allow_fc_extension: bool = False) -> WindowDataset:
    """Every lag window of source channels paired with the location's flow ``horizon`` steps ahead"""
    _, channels = location_channels(data, geometry, scenario, variant, fd, location, allow_fc_extension)
    observed = data[scenario.location(location)].flow
    windows, targets, ends = build_feature_windows(channels, observed, lag, horizon)
    return WindowDataset(windows, targets, ends)


def train_scenario(data: Data, geometry: SectionGeometry, scenario: ScenarioSpec, variant: FeatureVariant,
                   fd: TriangularFD, architecture: str = "dataset1", lag: Optional[int] = None,
                   horizon: int = 1, config: Optional[TrainConfig] = None,
                   allow_fc_extension: bool = False, progress: bool = False) -> ScenarioModel:
    """Train one model at the scenario's target station

    Args:
        data: Detector series keyed by station id, aligned in time
        geometry: Station positions
        scenario: Role assignment
        variant: Feature variant
        fd: Section fundamental diagram used by the estimators
        architecture: Key of ARCHITECTURES
        lag: Temporal lag; defaults to the architecture's training preset
        horizon: Steps ahead to predict
        config: Optimisation settings; batch size defaults to the architecture's preset
        allow_fc_extension: Permit Physics FC with both sources upstream
        progress: Show an epoch progress bar

    Returns:
        ScenarioModel holding the fitted predictor and its loss history
    """
    if architecture not in ARCHITECTURES:
        raise ValidationError("architecture", f"unknown architecture {architecture!r}")
    check_transfer(geometry, scenario, variant, allow_fc_extension)
    preset_batch, preset_lag = TRAINING_PRESETS[architecture]
    lag = lag or preset_lag
    config = config or TrainConfig(batch_size=preset_batch)
    dataset = scenario_dataset(data, geometry, scenario, variant, fd, Location.TARGET, lag, horizon,
                               allow_fc_extension)
    spec = ARCHITECTURES[architecture](dataset.windows.shape[1], lag)
    logger.info(f"Training Case {scenario.id} {variant.label} at {scenario.target} (horizon {horizon})")
    trained, history = train(spec, dataset, config, progress=progress)
    return ScenarioModel(scenario=scenario, variant=variant, trained=trained, history=history, lag=lag,
                         horizon=horizon, split=config.split, seed=config.seed)


def _test_predictions(model: ScenarioModel, location: Location, data: Data, geometry: SectionGeometry,
                      fd: TriangularFD, allow_fc_extension: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    dataset = scenario_dataset(data, geometry, model.scenario, model.variant, fd, location, model.lag,
                               model.horizon, allow_fc_extension)
    expected = model.trained.spec.input_shape[0]
    if dataset.windows.shape[1] != expected:
        raise UnsupportedVariant(
            f"{model.variant.label} builds {dataset.windows.shape[1]} channels at {location.value.lower()} "
            f"but the model was trained on {expected}", _context(model.scenario, location))
    _, _, test = dataset.split(model.split)
    predicted = predict(model.trained, test.windows)
    return test.targets, predicted, test.ends + model.horizon


def metric_rows(scenario_id: str, location: Location, variant: FeatureVariant, y: np.ndarray, y_hat: np.ndarray,
                speed: np.ndarray, horizon: int = 1, seed: int = 0,
                threshold: float = CONGESTION_SPEED) -> List[MetricRow]:
    """Combined, free-flow and congestion rows for one set of predictions"""
    congested = state_mask(speed, threshold)
    rows = []
    for state, mask in ((TrafficState.COMBINED, np.ones_like(congested)),
                        (TrafficState.FREE_FLOW, ~congested),
                        (TrafficState.CONGESTION, congested)):
        base = dict(scenario=scenario_id, location=location.value, variant=variant.label, state=state.value,
                    horizon=horizon, seed=seed, n=int(mask.sum()))
        if not mask.any():
            rows.append(MetricRow(**base))
            continue
        m = mape(y[mask], y_hat[mask])
        rows.append(MetricRow(
            **base,
            rmse=rmse(y[mask], y_hat[mask]),
            mape=None if np.isnan(m.value) else m.value,
            r2=r2(y[mask], y_hat[mask]),
            mape_excluded=m.excluded,
        ))
    return rows


def unsupported_rows(scenario_id: str, location: Location, variant: FeatureVariant, horizon: int = 1,
                     seed: int = 0) -> List[MetricRow]:
    return [MetricRow(scenario=scenario_id, location=location.value, variant=variant.label, state=state.value,
                      horizon=horizon, seed=seed, supported=False)
            for state in TrafficState]


def evaluate(model: ScenarioModel, location: Location, data: Data, geometry: SectionGeometry,
             fd: TriangularFD, allow_fc_extension: bool = False,
             threshold: float = CONGESTION_SPEED) -> MetricsReport:
    """Metrics over the test partition at the target or, without retraining, at the transfer station

    Features are rebuilt with the evaluation station's distances and relative
    positions. Congestion is judged by that station's own speed.
    """
    y, y_hat, index = _test_predictions(model, location, data, geometry, fd, allow_fc_extension)
    speed = data[model.scenario.location(location)].speed[index]
    rows = metric_rows(model.scenario.id, location, model.variant, y, y_hat, speed, model.horizon, model.seed,
                       threshold)
    combined = rows[0]
    logger.info(
        f"Case {model.scenario.id} {location.value} {model.variant.label}: "
        f"RMSE={combined.rmse:.4f} over {combined.n} intervals"
    )
    return MetricsReport(rows)


def prediction_trace(model: ScenarioModel, location: Location, data: Data, geometry: SectionGeometry,
                     fd: TriangularFD, allow_fc_extension: bool = False,
                     threshold: float = CONGESTION_SPEED) -> pd.DataFrame:
    """Per-interval observed and predicted flows over the test partition"""
    y, y_hat, index = _test_predictions(model, location, data, geometry, fd, allow_fc_extension)
    series = data[model.scenario.location(location)]
    congested = state_mask(series.speed[index], threshold)
    return pd.DataFrame({
        "timestamp": series.timestamps()[index].strftime("%Y-%m-%dT%H:%M:%SZ"),
        "scenario": model.scenario.id,
        "location": location.value,
        "variant": model.variant.label,
        "horizon": model.horizon,
        "observed": y,
        "predicted": y_hat,
        "state": np.where(congested, TrafficState.CONGESTION.value, TrafficState.FREE_FLOW.value),
    })


def evaluate_scenario(data: Data, geometry: SectionGeometry, scenario: ScenarioSpec, variant: FeatureVariant,
                      fd: TriangularFD, architecture: str = "dataset1", lag: Optional[int] = None,
                      horizon: int = 1, config: Optional[TrainConfig] = None, allow_fc_extension: bool = False,
                      threshold: float = CONGESTION_SPEED) -> Tuple[Optional[ScenarioModel], MetricsReport]:
    """Train at the target, then report both locations; refused combinations become unsupported rows"""
    seed = config.seed if config else 0
    try:
        model = train_scenario(data, geometry, scenario, variant, fd, architecture, lag, horizon, config,
                               allow_fc_extension)
    except UnsupportedVariant as exc:
        logger.warning(f"Skipping {exc.message}")
        report = MetricsReport(unsupported_rows(scenario.id, Location.TARGET, variant, horizon, seed))
        report.rows.extend(unsupported_rows(scenario.id, Location.TRANSFER, variant, horizon, seed))
        return None, report

    report = MetricsReport()
    for location in Location:
        try:
            report.extend(evaluate(model, location, data, geometry, fd, allow_fc_extension, threshold))
        except UnsupportedVariant as exc:
            logger.warning(f"Skipping {exc.message}")
            report.rows.extend(unsupported_rows(scenario.id, location, variant, horizon, seed))
    return model, report
