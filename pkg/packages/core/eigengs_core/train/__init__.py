"""Optimizer, eigen-model training and per-image fine-tuning."""

from .adam import AdamState, adam_step
from .config import LearningRates, TrainConfig
from .eigen_fit import component_mse, fit_eigenbasis, init_gaussians, init_weights
from .finetune import finetune_image

__all__ = [
    "AdamState",
    "adam_step",
    "LearningRates",
    "TrainConfig",
    "component_mse",
    "fit_eigenbasis",
    "init_gaussians",
    "init_weights",
    "finetune_image",
]
