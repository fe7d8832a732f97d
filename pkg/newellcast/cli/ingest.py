"""Detector CSV reading and writing

Format: header ``timestamp,station_id,flow_veh_per_5min,occupancy,speed_mph``,
ISO-8601 UTC timestamps, decimal points, LF line endings, one row per station
and 5-minute interval.
"""

from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from ..core import RECORD_INTERVAL, DetectorSeries, SectionGeometry
from ..errors import IngestError

COLUMNS = ["timestamp", "station_id", "flow_veh_per_5min", "occupancy", "speed_mph"]
NUMERIC = COLUMNS[2:]
TIME_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
UNIX_EPOCH = pd.Timestamp(0, tz="UTC")


def _fail(message: str, path: Path, line: Optional[int] = None) -> IngestError:
    where = f" (line {line})" if line is not None else ""
    return IngestError(f"{path}{where}: {message}", line=line, path=str(path))


def _parse(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise _fail(f"malformed row: {exc}", path) from exc
    except pd.errors.EmptyDataError as exc:
        raise _fail("file is empty", path, 1) from exc
    if list(frame.columns) != COLUMNS:
        raise _fail(f"header must be {','.join(COLUMNS)}", path, 1)

    times = pd.to_datetime(frame["timestamp"], utc=True, errors="coerce", format="ISO8601")
    values = {name: pd.to_numeric(frame[name], errors="coerce") for name in NUMERIC}
    bad = times.isna() | (frame["station_id"].str.strip() == "")
    for name in NUMERIC:
        bad |= values[name].isna()
    bad |= (values["flow_veh_per_5min"] < 0) | (values["speed_mph"] < 0)
    bad |= (values["occupancy"] < 0) | (values["occupancy"] > 1)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise _fail(f"malformed row {frame.iloc[row].tolist()}", path, row + 2)

    parsed = pd.DataFrame({
        "t": (times - UNIX_EPOCH).dt.total_seconds(),
        "station_id": frame["station_id"].str.strip(),
        **values,
    })
    parsed["line"] = np.arange(len(parsed)) + 2
    return parsed


def _station_series(rows: pd.DataFrame, station_id: str, position: float, path: Path, gap_policy: str,
                    max_gap: int) -> DetectorSeries:
    if not rows["t"].is_monotonic_increasing:
        logger.warning(f"{path}: {station_id} timestamps out of order, re-sorted")
        rows = rows.sort_values("t", kind="stable")
    duplicated = rows["t"].duplicated()
    if duplicated.any():
        raise _fail(f"duplicate timestamp for {station_id}", path, int(rows["line"][duplicated].iloc[0]))

    t = rows["t"].to_numpy(dtype=float)
    steps = (t - t[0]) / RECORD_INTERVAL
    index = np.rint(steps).astype(int)
    if not np.allclose(steps, index):
        off = int(np.flatnonzero(~np.isclose(steps, index))[0])
        raise _fail(f"{station_id} is not on a uniform 5-minute grid", path, int(rows["line"].iloc[off]))

    gaps = np.diff(index) - 1
    if np.any(gaps > 0):
        worst = int(gaps.max())
        if gap_policy == "reject" or worst > max_gap:
            at = int(np.argmax(gaps)) + 1
            allowed = 0 if gap_policy == "reject" else max_gap
            raise _fail(f"{station_id} misses {worst} consecutive intervals (allowed {allowed})", path,
                        int(rows["line"].iloc[at]))
        logger.warning(f"{path}: {station_id} has {int(gaps.sum())} missing intervals, filled linearly")

    grid = np.arange(index[-1] + 1)
    columns = {name: np.interp(grid, index, rows[name].to_numpy(dtype=float)) for name in NUMERIC}
    return DetectorSeries(
        station_id=station_id,
        position=position,
        t0=float(t[0]),
        flow=columns["flow_veh_per_5min"],
        occupancy=columns["occupancy"],
        speed=columns["speed_mph"],
        dt=RECORD_INTERVAL,
    )


def ingest(path: Union[str, Path], geometry: Optional[SectionGeometry] = None, gap_policy: str = "fill",
           max_gap: int = 2) -> List[DetectorSeries]:
    """Read a detector CSV into one series per station, in order of first appearance

    Args:
        path: CSV file
        geometry: Supplies station positions; stations it does not list get position 0
        gap_policy: "fill" interpolates short gaps linearly, "reject" refuses any gap
        max_gap: Longest run of missing intervals that "fill" repairs

    Returns:
        List of DetectorSeries
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"{path} does not exist", path=str(path))
    frame = _parse(path)
    if frame.empty:
        raise _fail("no records", path)
    positions: Dict[str, float] = dict(geometry.stations) if geometry else {}
    series = [
        _station_series(rows, station_id, positions.get(station_id, 0.0), path, gap_policy, max_gap)
        for station_id, rows in frame.groupby("station_id", sort=False)
    ]
    logger.info(f"Read {len(series)} stations, {sum(len(s) for s in series)} intervals from {path}")
    return series


def detector_frame(series: Sequence[DetectorSeries]) -> pd.DataFrame:
    """Long-format table: intervals in time order, stations in the given order within an interval"""
    parts = []
    for order, s in enumerate(series):
        parts.append(pd.DataFrame({
            "timestamp": s.timestamps().strftime(TIME_FORMAT),
            "station_id": s.station_id,
            "flow_veh_per_5min": s.flow,
            "occupancy": s.occupancy,
            "speed_mph": s.speed,
            "_t": s.t0 + s.dt * np.arange(len(s)),
            "_order": order,
        }))
    frame = pd.concat(parts, ignore_index=True).sort_values(["_t", "_order"], kind="stable")
    return frame[COLUMNS].reset_index(drop=True)


def write_detector_csv(series: Sequence[DetectorSeries], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    detector_frame(series).to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(series)} stations to {path}")
    return path
