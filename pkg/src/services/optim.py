"""Adam optimizer over named parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from src.core.errors import DimensionError, NumericError
from src.ndgrad import Tensor


@dataclass(frozen=True)
class AdamConfig:
    """Adam hyperparameters."""

    learning_rate: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@dataclass(frozen=True)
class AdamState:
    """Adam moments after ``step`` updates.

    Attributes:
        step: Number of updates applied.
        m: First-moment estimate per parameter.
        v: Second-moment estimate per parameter.
    """

    step: int
    m: Mapping[str, np.ndarray]
    v: Mapping[str, np.ndarray]

    @classmethod
    def zeros(cls, params: Mapping[str, Tensor]) -> AdamState:
        """Fresh state for the given parameters."""
        return cls(
            step=0,
            m={name: np.zeros(t.shape) for name, t in params.items()},
            v={name: np.zeros(t.shape) for name, t in params.items()},
        )


def adam_step(
    params: Mapping[str, Tensor],
    grads: Mapping[str, Tensor],
    state: AdamState,
    config: AdamConfig,
) -> tuple[dict[str, Tensor], AdamState]:
    """Apply one bias-corrected Adam update.

    Parameters are visited in the order of ``params`` so the update is
    bit-reproducible.

    Returns:
        tuple[dict[str, Tensor], AdamState]: Updated parameters and state.

    Raises:
        DimensionError: If a gradient is missing or misshapen.
        NumericError: If a gradient is not finite.
    """
    step = state.step + 1
    correction1 = 1.0 - config.beta1**step
    correction2 = 1.0 - config.beta2**step
    new_params: dict[str, Tensor] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, param in params.items():
        if name not in grads or grads[name].shape != param.shape:
            raise DimensionError(f"adam: gradient for {name} missing or misshapen")
        g = grads[name].data
        if not np.all(np.isfinite(g)):
            raise NumericError(f"adam: non-finite gradient for {name}")
        m = config.beta1 * state.m[name] + (1.0 - config.beta1) * g
        v = config.beta2 * state.v[name] + (1.0 - config.beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        update = config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
        new_params[name] = Tensor.wrap(param.data - update)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(step=step, m=new_m, v=new_v)
