"""Functional Adam with bias correction and per-group learning rates."""

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from eigengs_core.errors import NonFiniteError, ShapeError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """First/second moment buffers keyed like the parameter dict, plus the step count."""

    m1: dict[str, np.ndarray] = field(default_factory=dict)
    m2: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = EPSILON

    @classmethod
    def for_params(cls, params: Mapping[str, np.ndarray], **kwargs) -> "AdamState":
        return cls(
            m1={name: np.zeros_like(value) for name, value in params.items()},
            m2={name: np.zeros_like(value) for name, value in params.items()},
            **kwargs,
        )


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: Union[float, Mapping[str, float]],
) -> tuple[dict[str, np.ndarray], AdamState]:
    """
    One Adam update.

    Args:
        params: Parameter arrays by group name
        grads: Gradients with the same keys and shapes
        state: Moments from the previous step (empty buffers are created)
        lr: One learning rate, or one per group

    Returns:
        (new parameter dict, new state); inputs are left untouched

    Raises:
        ShapeError: Keys or shapes of params, grads and moments disagree
    """
    if set(params) != set(grads):
        raise ShapeError(f"Parameter groups {sorted(params)} != gradient groups {sorted(grads)}")

    t = state.t + 1
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t

    new_params, m1, m2 = {}, {}, {}
    for name, value in params.items():
        grad = np.asarray(grads[name])
        if grad.shape != value.shape:
            raise ShapeError(f"Gradient for {name} is {grad.shape}, parameter is {value.shape}")
        grad = grad.astype(value.dtype, copy=False)

        prev_m1 = state.m1.get(name)
        prev_m2 = state.m2.get(name)
        if prev_m1 is None or prev_m2 is None:
            prev_m1 = np.zeros_like(value)
            prev_m2 = np.zeros_like(value)
        if prev_m1.shape != value.shape or prev_m2.shape != value.shape:
            raise ShapeError(f"Moment buffers for {name} do not match shape {value.shape}")

        m1[name] = state.beta1 * prev_m1 + (1.0 - state.beta1) * grad
        m2[name] = state.beta2 * prev_m2 + (1.0 - state.beta2) * (grad * grad)

        rate = lr[name] if isinstance(lr, Mapping) else lr
        step = rate * (m1[name] / bc1) / (np.sqrt(m2[name] / bc2) + state.eps)
        new_params[name] = (value - step).astype(value.dtype, copy=False)

        if not np.all(np.isfinite(new_params[name])):
            raise NonFiniteError(f"Adam produced non-finite values in {name}")

    return new_params, AdamState(m1, m2, t, state.beta1, state.beta2, state.eps)
