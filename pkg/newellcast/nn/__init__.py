"""Convolutional-recurrent flow predictor with exact gradients and Adadelta"""

from .models import (
    ARCHITECTURES,
    TRAINING_PRESETS,
    DenseSpec,
    LossRecord,
    ModelSpec,
    TrainConfig,
    TrainHistory,
    dataset1_spec,
    dataset2_spec,
)
from .layers import conv2d_forward, lstm_forward, reshape_for_recurrence
from .network import CnnLstm, backward, forward, loss, mse
from .optim import AdadeltaState, adadelta_step
from .scaling import Standardizer
from .training import TrainedModel, WindowDataset, grad_check, predict, train
from .serialization import load_model, read_header, save_model

__all__ = [
    "ARCHITECTURES",
    "TRAINING_PRESETS",
    "DenseSpec",
    "LossRecord",
    "ModelSpec",
    "TrainConfig",
    "TrainHistory",
    "dataset1_spec",
    "dataset2_spec",
    "conv2d_forward",
    "lstm_forward",
    "reshape_for_recurrence",
    "CnnLstm",
    "backward",
    "forward",
    "loss",
    "mse",
    "AdadeltaState",
    "adadelta_step",
    "Standardizer",
    "TrainedModel",
    "WindowDataset",
    "grad_check",
    "predict",
    "train",
    "load_model",
    "read_header",
    "save_model",
]
