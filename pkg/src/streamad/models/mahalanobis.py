import numpy as np

from streamad.core import BaseDetector


class RunningMahalanobis(BaseDetector):
    """Mahalanobis distance to the running mean under the running covariance.

    The covariance accumulator uses the symmetric Welford form
    ``C += (n-1)/n * d d^T`` with ``d = x - mean_old``, so it stays exactly
    symmetric. The population covariance ``C / n`` is regularized by
    ``epsilon * I`` before solving, which keeps it invertible even while
    fewer than two instances have been seen (the covariance is then zero).
    """

    _param_names = ("epsilon", "seed")
    _state_names = ("count", "mean", "cov_acc")

    def __init__(self, epsilon: float = 1e-6, seed: int = 0):
        super().__init__(seed)
        self.epsilon = float(epsilon)
        self.count = 0
        self.mean = None
        self.cov_acc = None
        # test hook: when set, replaces the estimated covariance
        self.covariance_override = None

    def _bind(self, m):
        self.mean = np.zeros(m)
        self.cov_acc = np.zeros((m, m))

    def _fit(self, x):
        self.count += 1
        d = x - self.mean
        self.mean = self.mean + d / self.count
        self.cov_acc = self.cov_acc + ((self.count - 1) / self.count) * np.outer(d, d)

    @property
    def covariance(self) -> np.ndarray:
        """Population covariance; zero while ``count < 2``."""
        if self.count < 2:
            return np.zeros_like(self.cov_acc)
        return self.cov_acc / self.count

    def _score(self, x):
        d = x - self.mean
        if self.covariance_override is not None:
            cov = np.asarray(self.covariance_override, dtype=np.float64)
        else:
            cov = self.covariance + self.epsilon * np.eye(len(d))
        q = float(d @ np.linalg.solve(cov, d))
        return float(np.sqrt(max(q, 0.0)))
