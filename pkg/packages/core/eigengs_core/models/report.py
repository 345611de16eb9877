"""Per-iteration quality traces of fitting runs."""

from dataclasses import dataclass, field

import numpy as np

REPORT_COLUMNS = ("iteration", "loss", "psnr_db", "ssim", "seconds")


@dataclass(frozen=True)
class FitRecord:
    """One sampled point of a fitting run."""

    iteration: int
    loss: float
    psnr_db: float
    ssim: float
    seconds: float


@dataclass
class FitReport:
    """Sampled (iteration, loss, psnr_db, ssim, seconds) rows, in iteration order."""

    rows: list[FitRecord] = field(default_factory=list)

    def append(self, record: FitRecord) -> None:
        if self.rows:
            last = self.rows[-1]
            if record.iteration <= last.iteration:
                raise ValueError(
                    f"Iteration {record.iteration} does not follow {last.iteration}"
                )
            if record.seconds < last.seconds:
                raise ValueError("Elapsed time went backwards")
        self.rows.append(record)

    def record(self, iteration: int, loss: float, psnr_db: float, ssim: float, seconds: float) -> None:
        self.append(FitRecord(int(iteration), float(loss), float(psnr_db), float(ssim), float(seconds)))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def first(self) -> FitRecord:
        return self.rows[0]

    @property
    def last(self) -> FitRecord:
        return self.rows[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=np.float64)
