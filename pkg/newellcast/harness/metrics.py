"""Error metrics and traffic-state masks"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from ..core import DetectorSeries
from ..errors import ValidationError

CONGESTION_SPEED = 50.0
MAPE_FLOOR = 1.0


@dataclass(frozen=True)
class MapeResult:
    value: float
    excluded: int


def _pair(y: np.ndarray, y_hat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).reshape(-1)
    y_hat = np.asarray(y_hat, dtype=float).reshape(-1)
    if len(y) != len(y_hat):
        raise ValidationError("y_hat", f"length {len(y_hat)} differs from observations ({len(y)})")
    if len(y) == 0:
        raise ValidationError("y", "at least one sample required")
    return y, y_hat


def rmse(y: np.ndarray, y_hat: np.ndarray) -> float:
    y, y_hat = _pair(y, y_hat)
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


def mape(y: np.ndarray, y_hat: np.ndarray, floor: float = MAPE_FLOOR) -> MapeResult:
    """Mean absolute percentage error over samples with |y| >= floor

    Returns NaN when every sample is excluded.
    """
    y, y_hat = _pair(y, y_hat)
    keep = np.abs(y) >= floor
    excluded = int(np.count_nonzero(~keep))
    if excluded:
        logger.warning(f"MAPE excludes {excluded} of {len(y)} samples with |y| < {floor}")
    if not keep.any():
        return MapeResult(float("nan"), excluded)
    value = float(np.mean(np.abs((y[keep] - y_hat[keep]) / y[keep])) * 100.0)
    return MapeResult(value, excluded)


def r2(y: np.ndarray, y_hat: np.ndarray) -> Optional[float]:
    """Coefficient of determination; None when y is constant"""
    y, y_hat = _pair(y, y_hat)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return None
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot


def state_mask(speed: np.ndarray, threshold: float = CONGESTION_SPEED) -> np.ndarray:
    """True where the interval is congested (speed strictly below threshold)"""
    return np.asarray(speed, dtype=float) < threshold


def congestion_share(series: DetectorSeries, threshold: float = CONGESTION_SPEED) -> float:
    """Fraction of a station's intervals that are congested"""
    mask = state_mask(series.speed, threshold)
    return float(mask.mean()) if mask.size else 0.0
