"""Streaming anomaly detection: detectors, pipeline components and evaluation."""

from streamad.core import BaseDetector, Instance, StreamBatch, deserialize, serialize
from streamad.models import (
    LODA,
    HalfSpaceTrees,
    MeanDeviation,
    RunningMahalanobis,
    SlidingWindowKNN,
)

__version__ = "0.1.0"

__all__ = [
    "BaseDetector",
    "HalfSpaceTrees",
    "Instance",
    "LODA",
    "MeanDeviation",
    "RunningMahalanobis",
    "SlidingWindowKNN",
    "StreamBatch",
    "deserialize",
    "serialize",
]
