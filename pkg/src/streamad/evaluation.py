"""Prequential AUROC."""

from __future__ import annotations

from collections import deque
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from streamad.core import Stateful, as_score
from streamad.errors import BadLabel, BadParameter, MetricUndefined


def auroc(y_true, scores) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Ties receive averaged ranks, so a tied positive/negative pair counts
    one half.
    """
    y = np.asarray(y_true)
    s = np.asarray(scores, dtype=np.float64)
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefined(f"AUROC needs both classes, got {n_pos} positives and {n_neg} negatives")
    ranks = rankdata(s, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


class AUROCMetric(Stateful):
    """Streaming AUROC over every (label, score) pair seen so far.

    With ``window`` set, only the most recent ``window`` pairs count.

    Example
    -------
    >>> metric = AUROCMetric()
    >>> for y, s in [(0, 0.1), (1, 0.9)]:
    ...     metric.update(y, s)
    >>> metric.get()
    1.0
    """

    name = "auroc"
    _param_names = ("window",)
    _state_names = ("labels", "scores")

    def __init__(self, window: Optional[int] = None):
        if window is not None and window < 1:
            raise BadParameter(f"window must be >= 1, got {window}")
        self.window = window
        self.labels = deque(maxlen=window)
        self.scores = deque(maxlen=window)

    @property
    def positives(self) -> int:
        return sum(self.labels)

    @property
    def negatives(self) -> int:
        return len(self.labels) - self.positives

    def update(self, y_true, score):
        if y_true not in (0, 1):
            raise BadLabel(f"label must be 0 or 1, got {y_true!r}")
        score = as_score(score)
        self.labels.append(int(y_true))
        self.scores.append(score)
        return self

    def get(self) -> float:
        return auroc(list(self.labels), list(self.scores))
