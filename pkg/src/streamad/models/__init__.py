"""Streaming detectors."""

from streamad.models.hst import HalfSpaceTrees
from streamad.models.knn import SlidingWindowKNN
from streamad.models.loda import LODA
from streamad.models.mahalanobis import RunningMahalanobis
from streamad.models.meandev import MeanDeviation

__all__ = [
    "HalfSpaceTrees",
    "LODA",
    "MeanDeviation",
    "RunningMahalanobis",
    "SlidingWindowKNN",
]
