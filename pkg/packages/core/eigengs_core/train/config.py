"""Hyper-parameters for eigen-fitting and per-image fine-tuning."""

import math
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from eigengs_core.errors import ConfigurationError


class LearningRates(BaseModel):
    """Adam learning rates per parameter group."""

    pos: float = Field(2e-3, gt=0, description="Center logits")
    fac: float = Field(2e-3, gt=0, description="Covariance factor")
    weight: float = Field(1e-2, gt=0, description="Reduced or collapsed weights")

    def as_groups(self) -> dict[str, float]:
        return {"pos_raw": self.pos, "fac_raw": self.fac, "weights": self.weight}


class TrainConfig(BaseModel):
    """Settings of one eigen-fitting run (and the fine-tune budget that follows)."""

    n_gaussians: int = Field(1000, ge=1, description="Total Gaussian count |N|")
    low_fraction: float = Field(0.10, gt=0, lt=1, description="Share of Gaussians in the low-frequency set")
    k_low: Optional[int] = Field(None, ge=1, description="Low-frequency component count (default ceil(k/10))")
    lrs: LearningRates = Field(default_factory=LearningRates)
    phase1_iters: int = Field(1500, ge=0)
    phase2_iters: int = Field(1500, ge=0)
    finetune_iters: int = Field(500, ge=0)
    seed: int = Field(0, ge=0)
    freq_learning: bool = True
    init_scale: float = Field(0.02, gt=0, description="Initial Gaussian scale as a fraction of min(w, h)")
    eval_every: int = Field(50, ge=1, description="Iterations between report rows")

    @model_validator(mode="after")
    def check_partition(self) -> "TrainConfig":
        if self.freq_learning and self.n_gaussians < 2:
            raise ValueError("Frequency learning needs at least 2 Gaussians")
        return self

    def n_low(self) -> int:
        """Size of the low-frequency set: round(low_fraction·|N|) kept inside [1, |N|−1]."""
        if not self.freq_learning:
            return 0
        n_low = math.floor(self.low_fraction * self.n_gaussians + 0.5)
        return min(max(n_low, 1), self.n_gaussians - 1)

    def resolved_k_low(self, k: int) -> int:
        """
        Low-frequency component count for a k-component basis.

        Raises:
            ConfigurationError: Frequency learning on a basis that cannot be split
        """
        if not self.freq_learning:
            return 0
        if k < 2:
            raise ConfigurationError(f"Frequency learning needs k >= 2, basis has k={k}")
        k_low = self.k_low if self.k_low is not None else math.ceil(k / 10)
        if not 1 <= k_low < k:
            raise ConfigurationError(f"k_low={k_low} must lie in [1, {k - 1}]")
        return k_low
