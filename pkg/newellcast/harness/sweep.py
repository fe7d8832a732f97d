"""Prediction horizon sweep: one model per (variant, horizon)"""

from typing import Optional, Sequence

from loguru import logger

from ..core import SectionGeometry, TriangularFD
from ..errors import InsufficientDataError, ValidationError
from ..newell import FeatureVariant
from ..nn import TRAINING_PRESETS, TrainConfig
from .evaluation import Data, evaluate_scenario
from .metrics import CONGESTION_SPEED
from .models import MetricsReport, ScenarioSpec, TrafficState

DEFAULT_HORIZONS = (1, 2, 3, 4, 5)


def horizon_sweep(data: Data, geometry: SectionGeometry, scenario: ScenarioSpec,
                  variants: Sequence[FeatureVariant], fd: TriangularFD,
                  horizons: Sequence[int] = DEFAULT_HORIZONS, architecture: str = "dataset1",
                  lag: Optional[int] = None, config: Optional[TrainConfig] = None,
                  allow_fc_extension: bool = False, threshold: float = CONGESTION_SPEED) -> MetricsReport:
    """Combined-state errors per variant, horizon and location

    Each horizon gets an independently trained model. The report holds one
    row per (variant, horizon, location).
    """
    if not horizons or min(horizons) < 1:
        raise ValidationError("horizons", "horizons must be positive step counts")
    lag = lag or TRAINING_PRESETS.get(architecture, (10, 10))[1]
    length = len(next(iter(data.values())))
    if length - lag - max(horizons) + 1 < 4:
        raise InsufficientDataError(
            f"{length} intervals are too few for lag {lag} and horizon {max(horizons)}", count=length)

    report = MetricsReport()
    for variant in variants:
        for horizon in horizons:
            logger.info(f"Sweep Case {scenario.id} {variant.label}: horizon {horizon}")
            _, result = evaluate_scenario(data, geometry, scenario, variant, fd, architecture, lag, horizon,
                                          config, allow_fc_extension, threshold)
            report.rows.extend(result.select(state=TrafficState.COMBINED.value))
    return report
