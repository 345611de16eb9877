"""Domain types for EigenGS."""

from .image import ColorSpace, PlanarImage, ImageCorpus
from .basis import Eigenbasis, ProjectionCoeffs
from .gaussians import (
    Gaussian2D,
    GaussianCloud,
    EigenGaussianModel,
    ImageGaussianSet,
    Subset,
    Freeze,
)
from .report import FitRecord, FitReport, REPORT_COLUMNS

__all__ = [
    # Images
    "ColorSpace",
    "PlanarImage",
    "ImageCorpus",
    # Basis
    "Eigenbasis",
    "ProjectionCoeffs",
    # Gaussians
    "Gaussian2D",
    "GaussianCloud",
    "EigenGaussianModel",
    "ImageGaussianSet",
    "Subset",
    "Freeze",
    # Reports
    "FitRecord",
    "FitReport",
    "REPORT_COLUMNS",
]
