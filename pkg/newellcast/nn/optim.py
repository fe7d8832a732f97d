"""Adadelta optimiser"""

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..errors import ShapeError


@dataclass
class AdadeltaState:
    """Running averages E[g^2] and E[dx^2] per parameter, zero-initialised"""
    eg: Dict[str, np.ndarray] = field(default_factory=dict)
    ed: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Dict[str, np.ndarray]) -> "AdadeltaState":
        return cls(
            eg={k: np.zeros_like(v, dtype=float) for k, v in params.items()},
            ed={k: np.zeros_like(v, dtype=float) for k, v in params.items()},
        )


def adadelta_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdadeltaState,
                  lr: float = 0.10, rho: float = 0.95, eps: float = 1e-7) -> Dict[str, np.ndarray]:
    """One Adadelta update, applied to the parameter arrays in place

    Eg <- rho*Eg + (1-rho)*g^2
    delta = -sqrt(Ed + eps) / sqrt(Eg + eps) * g
    Ed <- rho*Ed + (1-rho)*delta^2
    param <- param + lr*delta
    """
    for key, param in params.items():
        g = grads[key]
        if g.shape != param.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {param.shape}", layer=key)
        if key not in state.eg:
            state.eg[key] = np.zeros_like(param, dtype=float)
            state.ed[key] = np.zeros_like(param, dtype=float)
        eg = state.eg[key]
        ed = state.ed[key]
        eg *= rho
        eg += (1.0 - rho) * g * g
        delta = -np.sqrt(ed + eps) / np.sqrt(eg + eps) * g
        ed *= rho
        ed += (1.0 - rho) * delta * delta
        param += lr * delta
    return params
