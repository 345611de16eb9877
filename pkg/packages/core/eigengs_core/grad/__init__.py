"""Analytic backward passes and the finite-difference gradient oracle."""

from .backward import (
    GradBuffers,
    Objective,
    backward_components,
    backward_image,
    components_objective,
    image_objective,
    stack_targets,
)
from .fd_check import FDEntry, FDReport, Instance, InstanceSpec, RenderMode, build_instance, fd_check

__all__ = [
    "GradBuffers",
    "Objective",
    "backward_components",
    "backward_image",
    "components_objective",
    "image_objective",
    "stack_targets",
    "FDEntry",
    "FDReport",
    "Instance",
    "InstanceSpec",
    "RenderMode",
    "build_instance",
    "fd_check",
]
