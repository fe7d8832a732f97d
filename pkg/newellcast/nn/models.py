"""Data models for the convolutional-recurrent predictor"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from ..errors import ShapeError, ValidationError

ACTIVATIONS = ("linear", "relu")
PADDINGS = ("same", "valid")


@dataclass(frozen=True)
class DenseSpec:
    """One fully connected layer"""
    units: int
    activation: str = "linear"


@dataclass(frozen=True)
class ModelSpec:
    """Layer chain: conv -> recurrent stack -> dense chain -> output

    Attributes:
        input_shape: (channels, lag) of one feature matrix
        filters: Convolution filters F
        kernel: (stations, timesteps) kernel extents
        padding: "same" (zero padding in both axes) or "valid"
        lstm_units: Unit counts of the stacked recurrent layers
        dense: Hidden dense layers before the output layer
        outputs: Output units
    """
    input_shape: Tuple[int, int]
    filters: int = 12
    kernel: Tuple[int, int] = (3, 2)
    padding: str = "same"
    lstm_units: Tuple[int, ...] = (10, 6)
    dense: Tuple[DenseSpec, ...] = ()
    outputs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_shape", tuple(int(v) for v in self.input_shape))
        object.__setattr__(self, "kernel", tuple(int(v) for v in self.kernel))
        object.__setattr__(self, "lstm_units", tuple(int(v) for v in self.lstm_units))
        object.__setattr__(self, "dense", tuple(
            d if isinstance(d, DenseSpec) else DenseSpec(**d) for d in self.dense))
        if len(self.input_shape) != 2 or min(self.input_shape) < 1:
            raise ShapeError(f"input shape must be (channels, lag) >= 1, got {self.input_shape}", layer="input")
        if len(self.kernel) != 2 or min(self.kernel) < 1:
            raise ShapeError(f"kernel extents must be >= 1, got {self.kernel}", layer="conv")
        if self.filters < 1:
            raise ShapeError(f"filters must be >= 1, got {self.filters}", layer="conv")
        if self.padding not in PADDINGS:
            raise ValidationError("padding", f"must be one of {PADDINGS}")
        if not self.lstm_units or min(self.lstm_units) < 1:
            raise ShapeError("at least one recurrent layer with >= 1 unit required", layer="lstm")
        for i, d in enumerate(self.dense):
            if d.units < 1 or d.activation not in ACTIVATIONS:
                raise ShapeError(f"invalid dense layer {d}", layer=f"dense{i}")
        if self.outputs < 1:
            raise ShapeError("outputs must be >= 1", layer="output")
        self.conv_output_shape()

    def conv_output_shape(self) -> Tuple[int, int, int]:
        """(stations, timesteps, filters) produced by the convolution"""
        n_stations, lag = self.input_shape
        ks, kt = self.kernel
        if self.padding == "same":
            return n_stations, lag, self.filters
        if ks > n_stations or kt > lag:
            raise ShapeError(f"kernel {self.kernel} larger than input {self.input_shape}", layer="conv")
        return n_stations - ks + 1, lag - kt + 1, self.filters

    def layer_shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """Output shape per layer, excluding the batch axis"""
        stations, steps, filters = self.conv_output_shape()
        shapes: List[Tuple[str, Tuple[int, ...]]] = [("conv", (stations, steps, filters)),
                                                     ("reshape", (steps, stations * filters))]
        for i, units in enumerate(self.lstm_units):
            last = i == len(self.lstm_units) - 1
            shapes.append((f"lstm{i}", (units,) if last else (steps, units)))
        for i, d in enumerate(self.dense):
            shapes.append((f"dense{i}", (d.units,)))
        shapes.append(("output", (self.outputs,)))
        return shapes

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dense"] = [asdict(d) for d in self.dense]
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSpec":
        return cls(
            input_shape=tuple(data["input_shape"]),
            filters=data["filters"],
            kernel=tuple(data["kernel"]),
            padding=data["padding"],
            lstm_units=tuple(data["lstm_units"]),
            dense=tuple(DenseSpec(**d) for d in data["dense"]),
            outputs=data["outputs"],
        )


def dataset1_spec(channels: int, lag: int = 10) -> ModelSpec:
    """conv(12, (3,2)) -> LSTM(10) -> LSTM(6) -> dense(1)"""
    return ModelSpec(input_shape=(channels, lag), filters=12, kernel=(3, 2), lstm_units=(10, 6))


def dataset2_spec(channels: int, lag: int = 20) -> ModelSpec:
    """conv(16, (3,2)) -> LSTM(10) -> LSTM(6) -> dense(6, relu) -> dense(1)"""
    return ModelSpec(input_shape=(channels, lag), filters=16, kernel=(3, 2), lstm_units=(10, 6),
                     dense=(DenseSpec(6, "relu"),))


ARCHITECTURES = {"dataset1": dataset1_spec, "dataset2": dataset2_spec}


@dataclass(frozen=True)
class TrainConfig:
    """Optimisation settings"""
    batch_size: int = 10
    epochs: int = 50
    lr: float = 0.10
    rho: float = 0.95
    eps: float = 1e-7
    seed: int = 0
    split: Tuple[float, float, float] = (0.60, 0.15, 0.25)

    def __post_init__(self) -> None:
        object.__setattr__(self, "split", tuple(float(f) for f in self.split))
        if self.batch_size < 1:
            raise ValidationError("batch_size", "must be at least 1")
        if self.epochs < 0:
            raise ValidationError("epochs", "must be non-negative")
        if len(self.split) != 3 or min(self.split) < 0 or not np.isclose(sum(self.split), 1.0):
            raise ValidationError("split", f"three non-negative fractions summing to 1 required, got {self.split}")
        if not (self.lr > 0 and 0 < self.rho < 1 and self.eps > 0):
            raise ValidationError("optimizer", "lr > 0, 0 < rho < 1 and eps > 0 required")


# batch size and temporal lag used with each architecture
TRAINING_PRESETS = {"dataset1": (10, 10), "dataset2": (20, 20)}


@dataclass
class LossRecord:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass
class TrainHistory:
    records: List[LossRecord] = field(default_factory=list)
    best_epoch: int = 0

    @property
    def val_losses(self) -> List[float]:
        return [r.val_loss for r in self.records]

    @property
    def train_losses(self) -> List[float]:
        return [r.train_loss for r in self.records]
