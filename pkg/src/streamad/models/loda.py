import math

import numpy as np

from streamad.core import BaseDetector
from streamad.errors import BadParameter


class LODA(BaseDetector):
    """Lightweight on-line detector of anomalies.

    Each of ``k`` sparse random projections (``ceil(sqrt(m))`` standard
    normal weights) feeds a one-dimensional equal-width histogram with
    ``bins`` bins. The score is the mean negative log of the Laplace-smoothed
    bin frequency across projections::

        score(x) = -(1/k) * sum_i log((c_i(x) + 1) / (N_i + bins))

    Bin edges are fixed from the first ``warmup`` projected values, whose
    per-projection range is widened by 10% on each side; later values outside
    the range fall into the edge bins.

    Parameters
    ----------
    k : int
        Number of projections.
    bins : int
        Histogram bins per projection.
    warmup : int
        Instances buffered before the bin edges are frozen.
    seed : int
        Seed for the projection weights, drawn when the dimension is bound.
    projections : array-like of shape (k, m), optional
        Fixed projection matrix, bypassing the random draw.
    limits : pair of array-likes of shape (k,), optional
        Fixed histogram ranges ``(lo, hi)``. Skips warmup entirely.
    """

    _param_names = ("k", "bins", "warmup", "seed", "projections", "limits")
    _state_names = ("weights", "lo", "hi", "counts", "totals", "buffer")

    def __init__(self, k: int = 100, bins: int = 100, warmup: int = 256,
                 seed: int = 0, projections=None, limits=None):
        super().__init__(seed)
        if k < 1 or bins < 1 or warmup < 1:
            raise BadParameter("k, bins and warmup must all be >= 1")
        self.k = int(k)
        self.bins = int(bins)
        self.warmup = int(warmup)
        self.projections = None
        if projections is not None:
            self.projections = np.asarray(projections, dtype=np.float64)
            if self.projections.ndim != 2 or self.projections.shape[0] != self.k:
                raise BadParameter(f"projections must have shape ({self.k}, m)")
        self.limits = None
        if limits is not None:
            lo, hi = (np.asarray(v, dtype=np.float64).reshape(-1) for v in limits)
            lo = np.broadcast_to(lo, (self.k,)).copy()
            hi = np.broadcast_to(hi, (self.k,)).copy()
            if np.any(hi <= lo):
                raise BadParameter("limits need hi > lo for every projection")
            self.limits = (lo, hi)

        self.weights = None
        self.lo = None
        self.hi = None
        self.counts = None
        self.totals = None
        self.buffer = []

    @property
    def memory_budget(self):
        return self.warmup

    @property
    def retained_instances(self):
        return len(self.buffer)

    @property
    def warmed_up(self) -> bool:
        return self.lo is not None

    def _bind(self, m):
        if self.projections is not None:
            if self.projections.shape[1] != m:
                raise BadParameter(f"projections expect {self.projections.shape[1]} features, got {m}")
            self.weights = self.projections.copy()
        else:
            rng = np.random.default_rng(self.seed)
            nnz = math.ceil(math.sqrt(m))
            self.weights = np.zeros((self.k, m))
            for i in range(self.k):
                pos = rng.choice(m, size=nnz, replace=False)
                self.weights[i, pos] = rng.standard_normal(nnz)
        if self.limits is not None:
            self._set_edges(*self.limits)

    def _set_edges(self, lo, hi):
        self.lo = np.array(lo, dtype=np.float64)
        self.hi = np.array(hi, dtype=np.float64)
        self.counts = np.zeros((self.k, self.bins), dtype=np.int64)
        self.totals = np.zeros(self.k, dtype=np.int64)

    def bin_index(self, z: np.ndarray) -> np.ndarray:
        """Histogram bin of each projected value, clamped to the edge bins."""
        width = (self.hi - self.lo) / self.bins
        idx = np.floor((z - self.lo) / width)
        return np.clip(idx, 0, self.bins - 1).astype(np.int64)

    def _absorb(self, z):
        self.counts[np.arange(self.k), self.bin_index(z)] += 1
        self.totals += 1

    def _fit(self, x):
        z = self.weights @ x
        if self.warmed_up:
            self._absorb(z)
            return
        self.buffer.append(z)
        if len(self.buffer) >= self.warmup:
            held = np.asarray(self.buffer)
            lo, hi = held.min(axis=0), held.max(axis=0)
            span = hi - lo
            # a constant projection gets a unit-wide range instead of 10% of zero
            pad = np.where(span > 0, 0.1 * span, 0.5)
            self._set_edges(lo - pad, hi + pad)
            for row in held:
                self._absorb(row)
            self.buffer = []

    def _score(self, x):
        z = self.weights @ x
        if self.warmed_up:
            c = self.counts[np.arange(self.k), self.bin_index(z)]
            p = (c + 1.0) / (self.totals + self.bins)
            return float(-np.mean(np.log(p)))
        if len(self.buffer) < 2:
            return 0.0
        return self._warmup_score(z)

    def _warmup_score(self, z):
        # Unsmoothed histogram over the live buffer's own range. Empty bins
        # count as holding one value so that the score stays finite.
        held = np.asarray(self.buffer)
        n = len(held)
        lo, hi = held.min(axis=0), held.max(axis=0)
        width = (hi - lo) / self.bins
        safe = np.where(width > 0, width, 1.0)

        def index(v):
            idx = np.where(width > 0, np.floor((v - lo) / safe), 0)
            return np.clip(idx, 0, self.bins - 1).astype(np.int64)

        q = index(z)
        c = np.sum(index(held) == q, axis=0)
        p = np.maximum(c, 1) / n
        return float(-np.mean(np.log(p)))

    def get_state(self):
        state = super().get_state()
        state["buffer"] = (np.asarray(self.buffer).reshape(-1, self.k)
                           if self.buffer else None)
        return state

    def _restore(self):
        self.buffer = [] if self.buffer is None else [row.copy() for row in self.buffer]
