"""Convolutional-recurrent predictor assembled from a ModelSpec"""

from typing import Dict, List, Tuple

import numpy as np

from ..errors import ShapeError
from .layers import Conv2D, Dense, Layer, LSTM, reshape_for_recurrence
from .models import ModelSpec


class CnnLstm:
    """conv -> reshape -> stacked LSTM -> dense chain -> output"""

    def __init__(self, spec: ModelSpec, seed: int = 0):
        """Build and initialise the layer chain

        Args:
            spec: Architecture; shape compatibility is checked here
            seed: Seed for weight initialisation
        """
        self.spec = spec
        rng = np.random.default_rng(seed)
        stations, steps, filters = spec.conv_output_shape()

        self.conv = Conv2D(spec.filters, spec.kernel, spec.padding, rng, name="conv")
        self.recurrent: List[LSTM] = []
        width = stations * filters
        for i, units in enumerate(spec.lstm_units):
            last = i == len(spec.lstm_units) - 1
            self.recurrent.append(LSTM(width, units, return_sequences=not last, rng=rng, name=f"lstm{i}"))
            width = units
        self.dense: List[Dense] = []
        for i, d in enumerate(spec.dense):
            self.dense.append(Dense(width, d.units, d.activation, rng, name=f"dense{i}"))
            width = d.units
        self.dense.append(Dense(width, spec.outputs, "linear", rng, name="output"))
        self._conv_shape: Tuple[int, ...] = ()

    @property
    def layers(self) -> List[Layer]:
        return [self.conv, *self.recurrent, *self.dense]

    def parameters(self) -> Dict[str, np.ndarray]:
        """Live parameter arrays keyed by "<layer>.<name>"; updates apply in place"""
        return {f"{layer.name}.{key}": value for layer in self.layers for key, value in layer.params.items()}

    def gradients(self) -> Dict[str, np.ndarray]:
        return {f"{layer.name}.{key}": value for layer in self.layers for key, value in layer.grads.items()}

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters().values()))

    def set_parameters(self, values: Dict[str, np.ndarray]) -> None:
        params = self.parameters()
        for key, value in values.items():
            if key not in params or params[key].shape != np.shape(value):
                raise ShapeError(f"parameter {key} does not match the architecture", layer=key.split(".")[0])
            params[key][...] = value

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Predict for a batch of shape (batch, channels, lag); returns (batch, outputs)"""
        if x.ndim != 3 or tuple(x.shape[1:]) != self.spec.input_shape:
            raise ShapeError(f"expected (batch, {self.spec.input_shape[0]}, {self.spec.input_shape[1]}), "
                             f"got {x.shape}", layer="input")
        h = self.conv.forward(x)
        self._conv_shape = h.shape
        h = reshape_for_recurrence(h)
        for layer in self.recurrent:
            h = layer.forward(h)
        for layer in self.dense:
            h = layer.forward(h)
        return h

    def backward(self, dout: np.ndarray) -> None:
        """Backpropagate d(loss)/d(output) through the chain, filling every layer's grads"""
        g = dout
        for layer in reversed(self.dense):
            g = layer.backward(g)
        for layer in reversed(self.recurrent):
            g = layer.backward(g)
        b, stations, steps, filters = self._conv_shape
        g = np.transpose(g.reshape(b, steps, stations, filters), (0, 2, 1, 3))
        self.conv.backward(g)


def mse(prediction: np.ndarray, target: np.ndarray) -> float:
    return float(np.mean((prediction - target) ** 2))


def mse_grad(prediction: np.ndarray, target: np.ndarray) -> np.ndarray:
    return 2.0 * (prediction - target) / prediction.size


def forward(model: CnnLstm, features: np.ndarray) -> np.ndarray:
    """Prediction for one (channels, lag) matrix or a batch of them"""
    single = features.ndim == 2
    out = model.forward(features[None] if single else features)
    return out[0] if single else out


def backward(model: CnnLstm, x: np.ndarray, y: np.ndarray) -> Dict[str, np.ndarray]:
    """Mean-squared-error gradients for every parameter on a batch

    Args:
        model: Network
        x: Features (batch, channels, lag)
        y: Targets (batch,) or (batch, outputs)

    Returns:
        Gradient arrays keyed like ``model.parameters()``
    """
    prediction = model.forward(x)
    target = np.asarray(y, dtype=float).reshape(prediction.shape)
    model.backward(mse_grad(prediction, target))
    return {k: v.copy() for k, v in model.gradients().items()}


def loss(model: CnnLstm, x: np.ndarray, y: np.ndarray) -> float:
    prediction = model.forward(x)
    return mse(prediction, np.asarray(y, dtype=float).reshape(prediction.shape))
