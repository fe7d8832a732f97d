"""Layers with exact reverse-mode gradients

Every layer keeps its parameters in ``params`` and, after ``backward``, the
matching gradients in ``grads``. Arrays carry a leading batch axis.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import ShapeError


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def glorot_uniform(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _same_padding(extent: int) -> Tuple[int, int]:
    before = (extent - 1) // 2
    return before, extent - 1 - before


def _pad(x: np.ndarray, kernel: Tuple[int, int], padding: str) -> np.ndarray:
    if padding == "valid":
        return x
    return np.pad(x, ((0, 0), _same_padding(kernel[0]), _same_padding(kernel[1])))


def conv2d_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray, padding: str = "same") -> np.ndarray:
    """ReLU convolution over a stations x lag input

    Args:
        x: Input of shape (N, n) or (batch, N, n)
        weights: Kernel of shape (k_s, k_t, F)
        bias: Shape (F,)
        padding: "same" zero-fills both axes so output extents equal input extents

    Returns:
        Activations of shape (N', n', F), with a leading batch axis if x had one
    """
    single = x.ndim == 2
    batch = x[None] if single else x
    out = np.maximum(_conv_preactivation(batch, weights, bias, padding), 0.0)
    return out[0] if single else out


def _conv_preactivation(x: np.ndarray, weights: np.ndarray, bias: np.ndarray, padding: str) -> np.ndarray:
    ks, kt, _ = weights.shape
    padded = _pad(x, (ks, kt), padding)
    rows, cols = padded.shape[1] - ks + 1, padded.shape[2] - kt + 1
    if rows < 1 or cols < 1:
        raise ShapeError(f"kernel {(ks, kt)} larger than padded input {padded.shape[1:]}", layer="conv")
    z = np.broadcast_to(bias, (x.shape[0], rows, cols, len(bias))).copy()
    for a in range(ks):
        for c in range(kt):
            z += padded[:, a:a + rows, c:c + cols, None] * weights[a, c]
    return z


def reshape_for_recurrence(conv_out: np.ndarray) -> np.ndarray:
    """Turn (N, n, F) activations into n steps of N*F features

    Time becomes the sequence axis; each step's features are ordered station
    by station, filters innermost. A leading batch axis is preserved.
    """
    if conv_out.ndim == 3:
        return np.transpose(conv_out, (1, 0, 2)).reshape(conv_out.shape[1], -1)
    b, n_stations, steps, filters = conv_out.shape
    return np.transpose(conv_out, (0, 2, 1, 3)).reshape(b, steps, n_stations * filters)


def lstm_forward(seq: np.ndarray, w: np.ndarray, u: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gated recurrence over a sequence

    Gate blocks in ``w``, ``u`` and ``b`` are ordered input, forget, candidate,
    output. Initial hidden and cell states are zero.

    Args:
        seq: Shape (T, D) or (batch, T, D)
        w: Input weights (D, 4U)
        u: Recurrent weights (U, 4U)
        b: Bias (4U,)

    Returns:
        (final hidden state, hidden states for every step)
    """
    single = seq.ndim == 2
    hidden, _ = _lstm_scan(seq[None] if single else seq, w, u, b)
    if single:
        return hidden[0, -1], hidden[0]
    return hidden[:, -1], hidden


def _lstm_scan(x: np.ndarray, w: np.ndarray, u: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, List[Dict[str, np.ndarray]]]:
    batch, steps, _ = x.shape
    units = u.shape[0]
    if steps < 1:
        raise ShapeError("empty sequence", layer="lstm")
    h = np.zeros((batch, units))
    c = np.zeros((batch, units))
    hidden = np.zeros((batch, steps, units))
    cache = []
    for t in range(steps):
        z = x[:, t] @ w + h @ u + b
        i = sigmoid(z[:, :units])
        f = sigmoid(z[:, units:2 * units])
        g = np.tanh(z[:, 2 * units:3 * units])
        o = sigmoid(z[:, 3 * units:])
        c_prev, h_prev = c, h
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        hidden[:, t] = h
        cache.append({"i": i, "f": f, "g": g, "o": o, "c_prev": c_prev, "h_prev": h_prev, "tc": tc})
    return hidden, cache


class Layer:
    """Base class for trainable layers"""

    name = "layer"

    def __init__(self) -> None:
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2D(Layer):
    """Single-input-channel 2-d convolution followed by ReLU"""

    def __init__(self, filters: int, kernel: Tuple[int, int], padding: str, rng: np.random.Generator,
                 name: str = "conv"):
        super().__init__()
        self.name = name
        self.padding = padding
        ks, kt = kernel
        self.params = {
            "W": glorot_uniform(rng, (ks, kt, filters), ks * kt, ks * kt * filters),
            "b": np.zeros(filters),
        }
        self._x: Optional[np.ndarray] = None
        self._z: Optional[np.ndarray] = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = _pad(x, self.params["W"].shape[:2], self.padding)
        self._z = _conv_preactivation(x, self.params["W"], self.params["b"], self.padding)
        return np.maximum(self._z, 0.0)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        ks, kt, _ = self.params["W"].shape
        dz = dout * (self._z > 0)
        rows, cols = dz.shape[1], dz.shape[2]
        dw = np.empty_like(self.params["W"])
        dx_padded = np.zeros_like(self._x)
        for a in range(ks):
            for c in range(kt):
                patch = self._x[:, a:a + rows, c:c + cols]
                dw[a, c] = np.einsum("bij,bijf->f", patch, dz)
                dx_padded[:, a:a + rows, c:c + cols] += dz @ self.params["W"][a, c]
        self.grads = {"W": dw, "b": dz.sum(axis=(0, 1, 2))}
        if self.padding == "valid":
            return dx_padded
        (top, bottom), (left, right) = _same_padding(ks), _same_padding(kt)
        return dx_padded[:, top:dx_padded.shape[1] - bottom, left:dx_padded.shape[2] - right]


class LSTM(Layer):
    """Recurrent layer; returns the full hidden sequence or only the last state"""

    def __init__(self, input_dim: int, units: int, return_sequences: bool, rng: np.random.Generator,
                 name: str = "lstm"):
        super().__init__()
        self.name = name
        self.units = units
        self.return_sequences = return_sequences
        b = np.zeros(4 * units)
        b[units:2 * units] = 1.0
        self.params = {
            "W": glorot_uniform(rng, (input_dim, 4 * units), input_dim, 4 * units),
            "U": glorot_uniform(rng, (units, 4 * units), units, 4 * units),
            "b": b,
        }
        self._x: Optional[np.ndarray] = None
        self._cache: List[Dict[str, np.ndarray]] = []

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        hidden, self._cache = _lstm_scan(x, self.params["W"], self.params["U"], self.params["b"])
        return hidden if self.return_sequences else hidden[:, -1]

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x, units = self._x, self.units
        batch, steps, _ = x.shape
        if self.return_sequences:
            dh_seq = dout
        else:
            dh_seq = np.zeros((batch, steps, units))
            dh_seq[:, -1] = dout
        w, u = self.params["W"], self.params["U"]
        dw, du, db = np.zeros_like(w), np.zeros_like(u), np.zeros(4 * units)
        dx = np.zeros_like(x)
        dh_next = np.zeros((batch, units))
        dc_next = np.zeros((batch, units))
        for t in reversed(range(steps)):
            s = self._cache[t]
            dh = dh_seq[:, t] + dh_next
            do = dh * s["tc"]
            dc = dh * s["o"] * (1.0 - s["tc"] ** 2) + dc_next
            di = dc * s["g"]
            dg = dc * s["i"]
            df = dc * s["c_prev"]
            dc_next = dc * s["f"]
            dz = np.concatenate([
                di * s["i"] * (1.0 - s["i"]),
                df * s["f"] * (1.0 - s["f"]),
                dg * (1.0 - s["g"] ** 2),
                do * s["o"] * (1.0 - s["o"]),
            ], axis=1)
            dw += x[:, t].T @ dz
            du += s["h_prev"].T @ dz
            db += dz.sum(axis=0)
            dx[:, t] = dz @ w.T
            dh_next = dz @ u.T
        self.grads = {"W": dw, "U": du, "b": db}
        return dx


class Dense(Layer):
    """Fully connected layer with linear or ReLU activation"""

    def __init__(self, input_dim: int, units: int, activation: str, rng: np.random.Generator,
                 name: str = "dense"):
        super().__init__()
        self.name = name
        self.activation = activation
        self.params = {
            "W": glorot_uniform(rng, (input_dim, units), input_dim, units),
            "b": np.zeros(units),
        }
        self._x: Optional[np.ndarray] = None
        self._z: Optional[np.ndarray] = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        self._z = x @ self.params["W"] + self.params["b"]
        return np.maximum(self._z, 0.0) if self.activation == "relu" else self._z

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dz = dout * (self._z > 0) if self.activation == "relu" else dout
        self.grads = {"W": self._x.T @ dz, "b": dz.sum(axis=0)}
        return dz @ self.params["W"].T
