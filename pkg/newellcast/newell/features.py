"""Feature matrices for the Regular, Physics FF, Physics FC and Hybrid variants"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core import CumulativeCurve, DetectorSeries, TriangularFD, align_series, cumulative_from_flows
from ..errors import UnsupportedVariant, ValidationError
from .models import EstimatorKind, FeatureTensor, FeatureVariant, RelativePosition
from .shifts import (
    congested_shift_downstream,
    congested_shift_upstream,
    ff_shift_downstream,
    ff_shift_upstream,
)

Source = Tuple[DetectorSeries, RelativePosition]
Label = Tuple[str, EstimatorKind]

SOURCE_COUNT = 2


def _free_flow(curve: CumulativeCurve, position: RelativePosition, fd: TriangularFD) -> CumulativeCurve:
    if position.upstream:
        return ff_shift_downstream(curve, position.d, fd.vf)
    return ff_shift_upstream(curve, position.d, fd.vf)


def _congested(curve: CumulativeCurve, position: RelativePosition, fd: TriangularFD) -> CumulativeCurve:
    if position.upstream:
        return congested_shift_downstream(curve, position.d, fd.w, fd.kj)
    return congested_shift_upstream(curve, position.d, fd.w, fd.kj)


def channel_count(variant: FeatureVariant, positions: Sequence[RelativePosition]) -> int:
    """Number of channels a variant produces for the given source layout"""
    if variant is FeatureVariant.HYBRID:
        return len(positions) + sum(1 for p in positions if not p.upstream)
    return len(positions)


def check_variant(variant: FeatureVariant, positions: Sequence[RelativePosition],
                  allow_fc_extension: bool = False, context: Optional[str] = None) -> None:
    """Raise UnsupportedVariant when the variant is undefined for this layout"""
    if len(positions) != SOURCE_COUNT:
        raise ValidationError("sources", f"exactly {SOURCE_COUNT} sources required, got {len(positions)}")
    all_upstream = all(p.upstream for p in positions)
    where = f" ({context})" if context else ""
    if variant is FeatureVariant.HYBRID and all_upstream:
        raise UnsupportedVariant(
            f"Hybrid needs a source downstream of the location{where}; both sources are upstream", context)
    if variant is FeatureVariant.PHYSICS_FC and all_upstream and not allow_fc_extension:
        raise UnsupportedVariant(
            f"Physics FC with both sources upstream requires the FC extension flag{where}", context)


def estimator_channels(variant: FeatureVariant, sources: Sequence[Source], fd: TriangularFD,
                       allow_fc_extension: bool = False,
                       context: Optional[str] = None) -> Tuple[List[Label], np.ndarray]:
    """Full-length estimated flow series, one row per channel

    Args:
        variant: Feature variant
        sources: (series, relative position) per source station
        fd: Section fundamental diagram
        allow_fc_extension: Permit the inverse congested estimator for upstream sources
        context: Scenario description used in error messages

    Returns:
        (row labels, array of shape channels x intervals) in veh/interval
    """
    positions = [p for _, p in sources]
    check_variant(variant, positions, allow_fc_extension, context)
    align_series([s for s, _ in sources])

    labels: List[Label] = []
    rows: List[np.ndarray] = []

    def add(series: DetectorSeries, kind: EstimatorKind, curve: CumulativeCurve) -> None:
        labels.append((series.station_id, kind))
        rows.append(np.diff(curve.counts))

    curves = [(series, position, cumulative_from_flows(series)) for series, position in sources]

    if variant is FeatureVariant.REGULAR:
        for series, _, curve in curves:
            add(series, EstimatorKind.RAW, curve)
    elif variant is FeatureVariant.PHYSICS_FF:
        for series, position, curve in curves:
            add(series, EstimatorKind.FREE_FLOW, _free_flow(curve, position, fd))
    elif variant is FeatureVariant.PHYSICS_FC:
        all_upstream = all(p.upstream for p in positions)
        for series, position, curve in curves:
            if position.upstream and not all_upstream:
                add(series, EstimatorKind.FREE_FLOW, _free_flow(curve, position, fd))
            else:
                add(series, EstimatorKind.CONGESTED, _congested(curve, position, fd))
    else:
        for series, position, curve in curves:
            add(series, EstimatorKind.FREE_FLOW, _free_flow(curve, position, fd))
        for series, position, curve in curves:
            if not position.upstream:
                add(series, EstimatorKind.CONGESTED, _congested(curve, position, fd))

    return labels, np.vstack(rows)


def _last_interval(series: DetectorSeries, t_end: float) -> int:
    steps = (t_end - series.t0) / series.dt
    index = int(round(steps))
    if not np.isclose(steps, index, atol=1e-6):
        raise ValidationError("t_end", "must fall on an interval boundary")
    return index - 1


def build_feature_tensor(variant: FeatureVariant, sources: Sequence[Source], fd: TriangularFD,
                         lag: int, t_end: float, allow_fc_extension: bool = False,
                         context: Optional[str] = None) -> FeatureTensor:
    """Last ``lag`` estimated flows per channel for intervals ending at or before t_end"""
    if lag < 1:
        raise ValidationError("lag", f"must be at least 1, got {lag}")
    labels, channels = estimator_channels(variant, sources, fd, allow_fc_extension, context)
    last = _last_interval(sources[0][0], t_end)
    if last >= channels.shape[1] or last - lag + 1 < 0:
        raise ValidationError("t_end", f"window of {lag} intervals ending at {t_end} is outside the record")
    return FeatureTensor(values=channels[:, last - lag + 1:last + 1], row_labels=labels, t_end=t_end)


def build_feature_windows(channels: np.ndarray, target_flow: np.ndarray, lag: int,
                          horizon: int = 1) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Every (lag window, future flow) sample over a channel matrix

    Window s covers intervals ``e - lag + 1 .. e`` and its target is interval
    ``e + horizon``.

    Returns:
        (windows of shape samples x channels x lag, targets, window end indices)
    """
    if lag < 1 or horizon < 1:
        raise ValidationError("lag", "lag and horizon must be at least 1")
    n = channels.shape[1]
    if len(target_flow) != n:
        raise ValidationError("target_flow", "target and channels cover different intervals")
    ends = np.arange(lag - 1, n - horizon)
    if len(ends) == 0:
        return np.zeros((0, channels.shape[0], lag)), np.zeros(0), ends
    index = ends[:, None] + np.arange(-lag + 1, 1)[None, :]
    windows = np.transpose(channels[:, index], (1, 0, 2))
    return windows, np.asarray(target_flow, dtype=float)[ends + horizon], ends
