"""EigenGS core: eigenbasis Gaussians, rasterizer, gradients, training and metrics."""

__version__ = "0.1.0"
