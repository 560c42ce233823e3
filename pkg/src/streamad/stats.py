"""Welford running moments."""

import numpy as np


class RunningMoments:
    """Per-dimension running mean and population variance.

    Uses the Welford recurrence, so the estimates match a two-pass
    computation to rounding error on any prefix of the stream.
    """

    def __init__(self, m: int):
        self.count = 0
        self.mean = np.zeros(m)
        self.m2 = np.zeros(m)

    def update(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    @property
    def variance(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros_like(self.m2)
        return np.maximum(self.m2 / self.count, 0.0)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def as_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean, "m2": self.m2}

    @classmethod
    def from_dict(cls, d: dict) -> "RunningMoments":
        rm = cls(len(d["mean"]))
        rm.count = d["count"]
        rm.mean = np.asarray(d["mean"], dtype=np.float64)
        rm.m2 = np.asarray(d["m2"], dtype=np.float64)
        return rm
