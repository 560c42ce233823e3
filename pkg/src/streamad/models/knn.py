from collections import deque

import numpy as np

from streamad.core import BaseDetector
from streamad.errors import BadParameter


class SlidingWindowKNN(BaseDetector):
    """Mean distance to the k nearest instances in a FIFO window.

    Parameters
    ----------
    window : int
        Number of most recent instances retained.
    k : int
        Neighbours averaged; fewer are used while the window is short.
    """

    _param_names = ("window", "k", "seed")
    _state_names = ("buffer",)

    def __init__(self, window: int = 250, k: int = 5, seed: int = 0):
        super().__init__(seed)
        if window < 1:
            raise BadParameter(f"window must be >= 1, got {window}")
        if k < 1:
            raise BadParameter(f"k must be >= 1, got {k}")
        self.window = int(window)
        self.k = int(k)
        self.buffer = deque(maxlen=self.window)

    @property
    def memory_budget(self):
        return self.window

    @property
    def retained_instances(self):
        return len(self.buffer)

    def _fit(self, x):
        self.buffer.append(x)

    def _score(self, x):
        if not self.buffer:
            return 0.0
        stored = np.asarray(self.buffer)
        dist = np.sqrt(np.sum((stored - x) ** 2, axis=1))
        k = min(self.k, len(dist))
        # stable sort keeps older entries first among equal distances
        nearest = dist[np.argsort(dist, kind="stable")[:k]]
        return float(np.mean(nearest))
