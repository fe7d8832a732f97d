"""Subcommands; each reads a RunConfig and writes its artifacts below the output directory"""

import json
import math
from dataclasses import asdict, replace
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger

from ..core import DetectorSeries, TriangularFD, align_series
from ..errors import ConfigError, NewellcastError, UnsupportedVariant
from ..harness import (
    Location,
    MetricRow,
    MetricsReport,
    ScenarioModel,
    build_scenario,
    check_transfer,
    congestion_share,
    evaluate as evaluate_location,
    format_table,
    horizon_sweep,
    location_channels,
    prediction_trace,
    summary_frame,
    sweep_frame,
    train_scenario,
    unsupported_rows,
)
from ..lwrsim import bottleneck_config, case_study_config, free_flow_config, run, shock_config
from ..newell import FeatureVariant
from ..nn import TrainHistory, load_model, read_header, save_model
from ..params import estimate_section_params, fd_scatter
from .config import RunConfig
from .ingest import TIME_FORMAT, ingest, write_detector_csv

DETECTORS_FILE = "detectors.csv"
PARAMS_FILE = "section_params.json"
SCATTER_FILE = "fd_scatter.csv"
CONGESTION_FILE = "congestion_share.csv"
FEATURES_DIR = "features"
MODELS_DIR = "models"
TRACES_DIR = "traces"
METRICS_CSV = "metrics.csv"
METRICS_JSON = "metrics.json"
SWEEP_CSV = "sweep.csv"
SWEEP_TABLE = "sweep.txt"
REPORT_METRICS = ("rmse", "mape", "r2")

PRESET_ROAD_MARGIN = 0.5  # mi past the last station
SIMULATION_PRESETS = {"free_flow": free_flow_config, "bottleneck": bottleneck_config, "shock": shock_config}

Data = Dict[str, DetectorSeries]
Job = Tuple[RunConfig, Data, TriangularFD, str, FeatureVariant]


def _slug(scenario_id: str, variant: FeatureVariant, horizon: Optional[int] = None) -> str:
    suffix = f"_h{horizon}" if horizon is not None else ""
    return f"{scenario_id}_{variant.value}{suffix}"


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def _write_text(text: str, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    return path


def _map(fn: Callable[[Any], Any], jobs: Sequence[Any], workers: int) -> List[Any]:
    """Run jobs in a process pool when more than one worker is configured; order is preserved"""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with Pool(processes=min(workers, len(jobs))) as pool:
        return pool.map(fn, jobs)


def detector_path(config: RunConfig) -> Path:
    return config.detectors or config.out / DETECTORS_FILE


def load_data(config: RunConfig) -> Data:
    """Ingest the detector file and keep the configured stations, upstream to downstream"""
    path = detector_path(config)
    if not path.exists():
        raise ConfigError("inputs.detectors", f"{path} not found; run simulate first or set inputs.detectors")
    keyed = align_series(ingest(path, config.geometry, config.ingest.gap_policy, config.ingest.max_gap))
    missing = [sid for sid in config.geometry.station_ids if sid not in keyed]
    if missing:
        raise ConfigError("geometry.stations", f"stations {missing} have no data in {path}")
    return {sid: keyed[sid] for sid in config.geometry.station_ids}


def section_fd(config: RunConfig, data: Data) -> TriangularFD:
    if config.fd.estimate:
        return estimate_section_params(list(data.values()), config.fd.w_assumed).fd
    return config.fd.diagram()


def simulate(config: RunConfig) -> List[Path]:
    """Write simulated detector data at the configured stations

    The short validation presets keep their own demand and bottleneck but get
    the configured diagram and stations; the road is extended past the last
    station when needed.
    """
    seed = config.component_seed("simulate")
    preset = config.simulation.preset
    fd = None if config.fd.estimate else config.fd.diagram()
    if preset == "case_study":
        sim = case_study_config(config.simulation.days, seed, config.simulation.noise, config.geometry, fd)
    else:
        base = SIMULATION_PRESETS[preset](fd)
        last = config.geometry.stations[-1][1]
        length = max(base.length, math.ceil((last + PRESET_ROAD_MARGIN) / base.dx - 1e-9) * base.dx)
        sim = replace(base, length=length, detector_positions=[pos for _, pos in config.geometry.stations],
                      detector_ids=config.geometry.station_ids, seed=seed, noise=config.simulation.noise)
    output = run(sim)
    return [write_detector_csv(output.series(), config.out / DETECTORS_FILE)]


def estimate(config: RunConfig) -> List[Path]:
    data = load_data(config)
    params = estimate_section_params(list(data.values()), config.fd.w_assumed)
    params_path = config.out / PARAMS_FILE
    _write_text(json.dumps(params.to_dict(), indent=2, sort_keys=True), params_path)

    scatter = pd.concat([fd_scatter(s) for s in data.values()], ignore_index=True)
    scatter["timestamp"] = scatter["timestamp"].dt.strftime(TIME_FORMAT)
    shares = pd.DataFrame({
        "station_id": list(data),
        "congestion_share": [congestion_share(s) for s in data.values()],
    })
    return [params_path, _write_csv(scatter, config.out / SCATTER_FILE),
            _write_csv(shares, config.out / CONGESTION_FILE)]


def transform(config: RunConfig) -> List[Path]:
    data = load_data(config)
    fd = section_fd(config, data)
    written = []
    for scenario_id in config.scenarios:
        scenario = build_scenario(scenario_id, config.geometry)
        timestamps = data[scenario.target].timestamps().strftime(TIME_FORMAT)
        for variant in config.variants:
            try:
                check_transfer(config.geometry, scenario, variant, config.fc_extension)
            except UnsupportedVariant as exc:
                logger.warning(f"Skipping {exc.message}")
                continue
            for location in Location:
                try:
                    labels, channels = location_channels(data, config.geometry, scenario, variant, fd, location,
                                                         config.fc_extension)
                except UnsupportedVariant as exc:
                    logger.warning(f"Skipping {exc.message}")
                    continue
                frame = pd.DataFrame({"timestamp": timestamps})
                for (station_id, kind), row in zip(labels, channels):
                    frame[f"{station_id}_{kind.value}"] = row
                name = f"{_slug(scenario_id, variant)}_{location.value.lower()}.csv"
                written.append(_write_csv(frame, config.out / FEATURES_DIR / name))
    return written


def _train_job(job: Job) -> List[Path]:
    config, data, fd, scenario_id, variant = job
    scenario = build_scenario(scenario_id, config.geometry)
    train_config = replace(config.train, seed=config.component_seed(f"train/{_slug(scenario_id, variant)}"))
    try:
        model = train_scenario(data, config.geometry, scenario, variant, fd, config.architecture, config.lag,
                               1, train_config, config.fc_extension)
    except UnsupportedVariant as exc:
        logger.warning(f"Skipping {exc.message}")
        return []
    return _save_scenario_model(model, config.out / MODELS_DIR / _slug(scenario_id, variant, 1))


def _save_scenario_model(model: ScenarioModel, stem: Path) -> List[Path]:
    meta = {
        "scenario": model.scenario.id,
        "variant": model.variant.value,
        "lag": model.lag,
        "horizon": model.horizon,
        "split": list(model.split),
        "seed": model.seed,
        "best_epoch": model.history.best_epoch,
    }
    model_path = save_model(model.trained, stem.with_suffix(".nwl"), meta)
    losses = pd.DataFrame([asdict(r) for r in model.history.records])
    loss_path = _write_csv(losses, stem.parent / f"{stem.name}_loss.csv")
    return [model_path, loss_path]


def load_scenario_model(config: RunConfig, path: Path) -> ScenarioModel:
    meta = read_header(path)["meta"]
    return ScenarioModel(
        scenario=build_scenario(meta["scenario"], config.geometry),
        variant=FeatureVariant(meta["variant"]),
        trained=load_model(path),
        history=TrainHistory(best_epoch=meta["best_epoch"]),
        lag=meta["lag"],
        horizon=meta["horizon"],
        split=tuple(meta["split"]),
        seed=meta["seed"],
    )


def _jobs(config: RunConfig, data: Data, fd: TriangularFD) -> List[Job]:
    return [(config, data, fd, s, v) for s in config.scenarios for v in config.variants]


def train(config: RunConfig) -> List[Path]:
    data = load_data(config)
    fd = section_fd(config, data)
    results = _map(_train_job, _jobs(config, data, fd), config.jobs)
    return [path for paths in results for path in paths]


def _evaluate_job(job: Job) -> Tuple[List[MetricRow], List[Path]]:
    config, data, fd, scenario_id, variant = job
    scenario = build_scenario(scenario_id, config.geometry)
    try:
        check_transfer(config.geometry, scenario, variant, config.fc_extension)
    except UnsupportedVariant as exc:
        logger.warning(f"Skipping {exc.message}")
        rows = unsupported_rows(scenario_id, Location.TARGET, variant, seed=config.seed)
        return rows + unsupported_rows(scenario_id, Location.TRANSFER, variant, seed=config.seed), []
    path = config.out / MODELS_DIR / f"{_slug(scenario_id, variant, 1)}.nwl"
    if not path.exists():
        raise NewellcastError(f"no model at {path}; run train first", path=str(path))

    model = load_scenario_model(config, path)
    rows: List[MetricRow] = []
    traces: List[Path] = []
    for location in Location:
        try:
            report = evaluate_location(model, location, data, config.geometry, fd, config.fc_extension)
        except UnsupportedVariant as exc:
            logger.warning(f"Skipping {exc.message}")
            rows.extend(unsupported_rows(scenario_id, location, variant, seed=config.seed))
            continue
        rows.extend(replace(r, seed=config.seed) for r in report.rows)
        trace = prediction_trace(model, location, data, config.geometry, fd, config.fc_extension)
        name = f"{_slug(scenario_id, variant, 1)}_{location.value.lower()}.csv"
        traces.append(_write_csv(trace, config.out / TRACES_DIR / name))
    return rows, traces


def write_report(report: MetricsReport, out: Path) -> List[Path]:
    csv_path = _write_csv(report.to_frame(), out / METRICS_CSV)
    json_path = _write_text(json.dumps([r.to_dict() for r in report.rows], indent=2), out / METRICS_JSON)
    return [csv_path, json_path]


def evaluate(config: RunConfig) -> List[Path]:
    data = load_data(config)
    fd = section_fd(config, data)
    report = MetricsReport()
    written: List[Path] = []
    for rows, traces in _map(_evaluate_job, _jobs(config, data, fd), config.jobs):
        report.rows.extend(rows)
        written.extend(traces)
    return write_report(report, config.out) + written


def _sweep_job(job: Job) -> List[MetricRow]:
    config, data, fd, scenario_id, variant = job
    scenario = build_scenario(scenario_id, config.geometry)
    train_config = replace(config.train, seed=config.component_seed(f"sweep/{_slug(scenario_id, variant)}"))
    report = horizon_sweep(data, config.geometry, scenario, [variant], fd, config.horizons, config.architecture,
                           config.lag, train_config, config.fc_extension)
    return [replace(r, seed=config.seed) for r in report.rows]


def sweep(config: RunConfig) -> List[Path]:
    data = load_data(config)
    fd = section_fd(config, data)
    report = MetricsReport()
    for rows in _map(_sweep_job, _jobs(config, data, fd), config.jobs):
        report.rows.extend(rows)
    csv_path = _write_csv(report.to_frame(), config.out / SWEEP_CSV)
    table = sweep_frame(report).to_string(index=False)
    return [csv_path, _write_text(table, config.out / SWEEP_TABLE)]


def report(config: RunConfig) -> List[Path]:
    """Merge evaluation (and sweep, when present) results into published-table layouts"""
    metrics_path = config.out / METRICS_CSV
    if not metrics_path.exists():
        raise ConfigError("out", f"{metrics_path} not found; run evaluate first")
    merged = MetricsReport.from_frame(pd.read_csv(metrics_path))
    written = []
    frames = []
    for metric in REPORT_METRICS:
        written.append(_write_text(format_table(merged, metric), config.out / f"report_{metric}.txt"))
        frame = summary_frame(merged, metric)
        frame.insert(0, "Metric", metric.upper())
        frames.append(frame)
    written.append(_write_csv(pd.concat(frames, ignore_index=True), config.out / "report.csv"))
    sweep_path = config.out / SWEEP_CSV
    if sweep_path.exists():
        sweep_report = MetricsReport.from_frame(pd.read_csv(sweep_path))
        written.append(_write_text(sweep_frame(sweep_report).to_string(index=False),
                                   config.out / "report_sweep.txt"))
    return written


COMMANDS: Dict[str, Callable[[RunConfig], List[Path]]] = {
    "simulate": simulate,
    "estimate": estimate,
    "transform": transform,
    "train": train,
    "evaluate": evaluate,
    "sweep": sweep,
    "report": report,
}
