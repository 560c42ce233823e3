import numpy as np

from streamad.core import BaseDetector
from streamad.stats import RunningMoments


class MeanDeviation(BaseDetector):
    """Reference detector: mean absolute z-score against running moments.

    score(x) = mean_j |x_j - mu_j| / max(sigma_j, eps)
    """

    _param_names = ("epsilon", "seed")
    _state_names = ("moments",)

    def __init__(self, epsilon: float = 1e-9, seed: int = 0):
        super().__init__(seed)
        self.epsilon = float(epsilon)
        self.moments = None

    def get_state(self):
        state = super().get_state()
        state["moments"] = None if self.moments is None else self.moments.as_dict()
        return state

    def _restore(self):
        if isinstance(self.moments, dict):
            self.moments = RunningMoments.from_dict(self.moments)

    def _bind(self, m):
        self.moments = RunningMoments(m)

    def _fit(self, x):
        self.moments.update(x)

    def _score(self, x):
        if self.moments.count == 0:
            return 0.0
        dev = np.abs(x - self.moments.mean) / np.maximum(self.moments.std, self.epsilon)
        return float(np.mean(dev))
