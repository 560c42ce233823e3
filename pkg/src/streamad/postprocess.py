"""Score smoothing and score-to-probability calibration."""

from __future__ import annotations

import bisect
import math
from collections import deque

from streamad.core import Stateful, as_score
from streamad.errors import BadParameter


class EWMA(Stateful):
    """Exponentially weighted moving average of the score stream.

    The first output equals the first input; afterwards
    ``s_bar = alpha * s + (1 - alpha) * s_bar_prev``.
    """

    _param_names = ("alpha",)
    _state_names = ("value",)

    def __init__(self, alpha: float = 0.5):
        if not 0.0 < alpha <= 1.0:
            raise BadParameter(f"alpha must lie in (0, 1], got {alpha}")
        self.alpha = float(alpha)
        self.value = None

    def fit_transform_partial(self, s) -> float:
        s = as_score(s)
        if self.value is None:
            self.value = s
        else:
            self.value = self.alpha * s + (1.0 - self.alpha) * self.value
        return self.value


class ConformalCalibrator(Stateful):
    """Rank of a score among the last ``window`` scores, as a probability.

    ``p = (#{w < s} + 0.5 * #{w == s}) / |W|``, computed before ``s`` joins
    the window. An empty window yields 0.5.
    """

    _param_names = ("window",)
    _state_names = ("buffer",)

    def __init__(self, window: int = 500):
        if window < 1:
            raise BadParameter(f"window must be >= 1, got {window}")
        self.window = int(window)
        self.buffer = deque(maxlen=self.window)
        self._sorted = []

    def _restore(self):
        self._sorted = sorted(self.buffer)

    @property
    def retained_instances(self) -> int:
        return len(self.buffer)

    @property
    def memory_budget(self) -> int:
        return self.window

    def transform_partial(self, s) -> float:
        s = as_score(s)
        if not self.buffer:
            return 0.5
        below = bisect.bisect_left(self._sorted, s)
        ties = bisect.bisect_right(self._sorted, s) - below
        return (below + 0.5 * ties) / len(self.buffer)

    def fit_partial(self, s):
        s = as_score(s)
        if len(self.buffer) == self.window:
            old = self.buffer[0]
            del self._sorted[bisect.bisect_left(self._sorted, old)]
        self.buffer.append(s)
        bisect.insort(self._sorted, s)
        return self

    def fit_transform_partial(self, s) -> float:
        p = self.transform_partial(s)
        self.fit_partial(s)
        return p


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


class GaussianTailCalibrator(Stateful):
    """Standard normal CDF of the score's z-value under running moments.

    The moments absorb ``s`` first, so the very first score maps to 0.5.
    """

    _param_names = ("epsilon",)
    _state_names = ("count", "mean", "m2")

    def __init__(self, epsilon: float = 1e-9):
        self.epsilon = float(epsilon)
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    @property
    def variance(self) -> float:
        return self.m2 / self.count if self.count else 0.0

    def fit_partial(self, s):
        s = as_score(s)
        self.count += 1
        delta = s - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (s - self.mean)
        return self

    def transform_partial(self, s) -> float:
        s = as_score(s)
        sd = max(math.sqrt(max(self.variance, 0.0)), self.epsilon)
        return _normal_cdf((s - self.mean) / sd)

    def fit_transform_partial(self, s) -> float:
        s = as_score(s)
        d = s - self.mean
        m2_old = self.m2
        self.fit_partial(s)
        n = self.count
        sd = math.sqrt(max(self.variance, 0.0))
        if sd < self.epsilon:
            return _normal_cdf((s - self.mean) / self.epsilon)
        dd = d * d
        if dd == 0.0:
            return 0.5
        # Equals (s - mean) / sd after the update, rearranged in terms of the
        # pre-update moments so each rounding step is monotone in |d|.
        z = math.copysign((n - 1) / math.sqrt(n * m2_old / dd + (n - 1)), d)
        return _normal_cdf(z)


def ewma(state: EWMA, s) -> float:
    return state.fit_transform_partial(s)


def conformal_calibrate(state: ConformalCalibrator, s) -> float:
    return state.fit_transform_partial(s)


def gaussian_tail_calibrate(state: GaussianTailCalibrator, s) -> float:
    return state.fit_transform_partial(s)
