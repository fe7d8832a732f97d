"""Per-channel standardisation of features and targets"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np


@dataclass
class Standardizer:
    """Feature mean/std per channel and target mean/std, fitted on training data"""
    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: float
    target_std: float

    @classmethod
    def fit(cls, x: np.ndarray, y: np.ndarray) -> "Standardizer":
        """Fit on windows of shape (samples, channels, lag) and targets (samples,)"""
        mean = x.mean(axis=(0, 2))
        std = x.std(axis=(0, 2))
        target_std = float(np.std(y))
        return cls(
            feature_mean=mean,
            feature_std=np.where(std > 0, std, 1.0),
            target_mean=float(np.mean(y)),
            target_std=target_std if target_std > 0 else 1.0,
        )

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.feature_mean[None, :, None]) / self.feature_std[None, :, None]

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.target_mean) / self.target_std

    def inverse_target(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float) * self.target_std + self.target_mean

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "target_mean": self.target_mean,
            "target_std": self.target_std,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Standardizer":
        return cls(
            feature_mean=np.asarray(data["feature_mean"], dtype=float),
            feature_std=np.asarray(data["feature_std"], dtype=float),
            target_mean=float(data["target_mean"]),
            target_std=float(data["target_std"]),
        )
