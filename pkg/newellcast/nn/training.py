"""Training loop, inference and gradient checking"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from ..errors import InsufficientDataError, ValidationError
from . import network
from .models import LossRecord, ModelSpec, TrainConfig, TrainHistory
from .network import CnnLstm
from .optim import AdadeltaState, adadelta_step
from .scaling import Standardizer


@dataclass(frozen=True)
class WindowDataset:
    """Feature windows with their next-step targets, in chronological order

    Attributes:
        windows: Shape (samples, channels, lag)
        targets: Shape (samples,), veh/interval
        ends: Index of each window's last interval in the underlying series
    """
    windows: np.ndarray
    targets: np.ndarray
    ends: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        windows = np.asarray(self.windows, dtype=float)
        targets = np.asarray(self.targets, dtype=float).reshape(-1)
        if windows.ndim != 3:
            raise ValidationError("windows", f"expected (samples, channels, lag), got shape {windows.shape}")
        if len(windows) != len(targets):
            raise ValidationError("targets", f"{len(targets)} targets for {len(windows)} windows")
        ends = np.arange(len(windows)) if self.ends is None else np.asarray(self.ends, dtype=int)
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "ends", ends)

    def __len__(self) -> int:
        return len(self.targets)

    def subset(self, start: int, stop: int) -> "WindowDataset":
        return WindowDataset(self.windows[start:stop], self.targets[start:stop], self.ends[start:stop])

    def split(self, fractions: Tuple[float, float, float]) -> Tuple["WindowDataset", "WindowDataset", "WindowDataset"]:
        """Chronological train/validation/test partitions; the test part takes the remainder"""
        n = len(self)
        n_train = int(np.floor(fractions[0] * n))
        n_val = int(np.floor(fractions[1] * n))
        parts = (self.subset(0, n_train), self.subset(n_train, n_train + n_val), self.subset(n_train + n_val, n))
        for name, part in zip(("train", "validation", "test"), parts):
            if len(part) == 0:
                raise InsufficientDataError(f"{name} partition is empty ({n} samples in total)", count=n)
        return parts


@dataclass
class TrainedModel:
    """Architecture, scaler and parameter values of a fitted predictor"""
    spec: ModelSpec
    scaler: Standardizer
    params: Dict[str, np.ndarray]

    def network(self) -> CnnLstm:
        """Fresh network carrying a copy of the fitted parameters"""
        model = CnnLstm(self.spec)
        model.set_parameters(self.params)
        return model


def _snapshot(model: CnnLstm) -> Dict[str, np.ndarray]:
    return {k: v.copy() for k, v in model.parameters().items()}


def _batched_loss(model: CnnLstm, x: np.ndarray, y: np.ndarray, batch: int = 512) -> float:
    total = 0.0
    for start in range(0, len(x), batch):
        pred = model.forward(x[start:start + batch])[:, 0]
        total += float(np.sum((pred - y[start:start + batch]) ** 2))
    return total / len(x)


def train(spec: ModelSpec, dataset: WindowDataset, config: Optional[TrainConfig] = None,
          progress: bool = False) -> Tuple[TrainedModel, TrainHistory]:
    """Fit a network with Adadelta on mean-squared error

    Features and targets are standardised with statistics of the training
    partition. Batches are drawn from the training partition in an order
    shuffled per epoch; the parameters from the epoch with the lowest
    validation loss are returned. Epoch 0 records the untrained losses.

    Args:
        spec: Architecture; its input shape must match the dataset windows
        dataset: Chronologically ordered samples
        config: Optimisation settings
        progress: Show a tqdm progress bar over epochs

    Returns:
        (trained model, loss history)
    """
    config = config or TrainConfig()
    train_part, val_part, _ = dataset.split(config.split)
    scaler = Standardizer.fit(train_part.windows, train_part.targets)
    x_train = scaler.transform(train_part.windows)
    y_train = scaler.transform_target(train_part.targets)
    x_val = scaler.transform(val_part.windows)
    y_val = scaler.transform_target(val_part.targets)

    model = CnnLstm(spec, seed=config.seed)
    params = model.parameters()
    state = AdadeltaState.for_params(params)
    rng = np.random.default_rng(config.seed)

    history = TrainHistory()
    best_val = _batched_loss(model, x_val, y_val)
    history.records.append(LossRecord(0, _batched_loss(model, x_train, y_train), best_val))
    best_params = _snapshot(model)
    logger.info(
        f"Training {model.parameter_count()} parameters on {len(train_part)} samples "
        f"({len(val_part)} validation), {config.epochs} epochs"
    )

    epochs = tqdm(range(1, config.epochs + 1), desc="epochs", disable=not progress)
    for epoch in epochs:
        order = rng.permutation(len(x_train))
        running = 0.0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            prediction = model.forward(x_train[idx])
            target = y_train[idx].reshape(prediction.shape)
            model.backward(network.mse_grad(prediction, target))
            running += network.mse(prediction, target) * len(idx)
            adadelta_step(params, model.gradients(), state, config.lr, config.rho, config.eps)
        val_loss = _batched_loss(model, x_val, y_val)
        history.records.append(LossRecord(epoch, running / len(order), val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_params = _snapshot(model)
            history.best_epoch = epoch
        logger.debug(f"epoch {epoch}: train={running / len(order):.5f} val={val_loss:.5f}")
        epochs.set_postfix(val=f"{val_loss:.4f}")

    logger.info(f"Best validation loss {best_val:.5f} at epoch {history.best_epoch}")
    return TrainedModel(spec=spec, scaler=scaler, params=best_params), history


def predict(trained: TrainedModel, windows: np.ndarray) -> np.ndarray:
    """De-standardised one-step predictions (veh/interval) for a batch of windows"""
    windows = np.asarray(windows, dtype=float)
    single = windows.ndim == 2
    batch = windows[None] if single else windows
    model = trained.network()
    out = np.concatenate([
        model.forward(trained.scaler.transform(batch[start:start + 512]))[:, 0]
        for start in range(0, len(batch), 512)
    ]) if len(batch) else np.zeros(0)
    flows = trained.scaler.inverse_target(out)
    return flows[0] if single else flows


def grad_check(model: CnnLstm, x: np.ndarray, y: np.ndarray, h: float = 1e-5,
               n_params: int = 200, seed: int = 0) -> float:
    """Largest relative error between analytic and central-difference gradients

    Samples ``n_params`` scalar parameters across all layers (all of them if
    the model has fewer). Relative error is |a - n| / (max(|a|, |n|) + 1e-12).
    """
    analytic = network.backward(model, x, y)
    params = model.parameters()
    flat = [(key, i) for key, value in params.items() for i in range(value.size)]
    rng = np.random.default_rng(seed)
    if len(flat) > n_params:
        picked = [flat[j] for j in rng.choice(len(flat), size=n_params, replace=False)]
    else:
        picked = flat

    worst = 0.0
    for key, i in picked:
        view = params[key].reshape(-1)
        original = view[i]
        view[i] = original + h
        plus = network.loss(model, x, y)
        view[i] = original - h
        minus = network.loss(model, x, y)
        view[i] = original
        numeric = (plus - minus) / (2.0 * h)
        a = analytic[key].reshape(-1)[i]
        worst = max(worst, abs(a - numeric) / (max(abs(a), abs(numeric)) + 1e-12))
    return worst
