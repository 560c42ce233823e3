"""Instance preprocessors (dimension-preserving) and random projectors."""

from __future__ import annotations

import numpy as np

from streamad.core import Stateful, as_vector
from streamad.errors import BadParameter, DimensionMismatch
from streamad.stats import RunningMoments


def unit_norm(x) -> np.ndarray:
    """Scale ``x`` to unit Euclidean norm; the zero vector passes through."""
    v = as_vector(x)
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return v.copy()
    # rescale first so squaring tiny or huge entries cannot under/overflow
    v = v / peak
    return v / np.linalg.norm(v)


class UnitNormScaler(Stateful):
    """Stateless wrapper around :func:`unit_norm` for use in a pipeline."""

    def fit_partial(self, x):
        return self

    def transform_partial(self, x) -> np.ndarray:
        return unit_norm(x)

    def fit_transform_partial(self, x) -> np.ndarray:
        return unit_norm(x)


class RunningStandardizer(Stateful):
    """Per-feature z-scoring against running Welford moments.

    ``fit_transform_partial`` updates the moments with ``x`` before
    transforming it, so the first instance always maps to zeros.
    """

    _param_names = ("epsilon",)
    _state_names = ("moments",)

    def __init__(self, epsilon: float = 1e-9):
        self.epsilon = float(epsilon)
        self.moments = None

    def get_state(self):
        return {"moments": None if self.moments is None else self.moments.as_dict()}

    def _restore(self):
        if isinstance(self.moments, dict):
            self.moments = RunningMoments.from_dict(self.moments)

    def _check(self, x):
        v = as_vector(x)
        if self.moments is not None and v.size != self.moments.mean.size:
            raise DimensionMismatch(f"expected {self.moments.mean.size} features, got {v.size}")
        return v

    def fit_partial(self, x):
        v = self._check(x)
        if self.moments is None:
            self.moments = RunningMoments(v.size)
        self.moments.update(v)
        return self

    def transform_partial(self, x) -> np.ndarray:
        v = self._check(x)
        if self.moments is None:
            return np.zeros_like(v)
        return (v - self.moments.mean) / np.maximum(self.moments.std, self.epsilon)

    def fit_transform_partial(self, x) -> np.ndarray:
        return self.fit_partial(x).transform_partial(x)


def running_standardize(state: RunningStandardizer, x) -> np.ndarray:
    return state.fit_transform_partial(x)


class RandomProjector(Stateful):
    """Fixed linear map ``R^m -> R^d``.

    The matrix is drawn once, at construction, and never changes. Use
    :func:`make_projector` to draw it; pass ``matrix`` directly to bypass
    the randomness.
    """

    _param_names = ("matrix", "kind", "seed")

    def __init__(self, matrix, kind: str = "explicit", seed: int = 0):
        self.matrix = np.array(matrix, dtype=np.float64, ndmin=2)
        self.matrix.setflags(write=False)
        self.kind = kind
        self.seed = seed

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def project(self, x) -> np.ndarray:
        v = as_vector(x)
        if v.size != self.m:
            raise DimensionMismatch(f"projector expects {self.m} features, got {v.size}")
        return self.matrix @ v

    def fit_partial(self, x):
        return self

    transform_partial = project
    fit_transform_partial = project


def make_projector(m: int, d: int, kind: str = "gaussian", seed: int = 0) -> RandomProjector:
    """Draw a random projection matrix of shape ``(d, m)``.

    ``gaussian`` entries are N(0, 1/d). ``sparse`` entries follow
    Achlioptas: ``sqrt(3/d) * {+1, 0, -1}`` with probabilities
    ``1/6, 2/3, 1/6``. Both keep squared norms unbiased.
    """
    if m < 1 or d < 1:
        raise BadParameter(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    rng = np.random.default_rng(seed)
    if kind == "gaussian":
        matrix = rng.normal(0.0, np.sqrt(1.0 / d), size=(d, m))
    elif kind == "sparse":
        signs = rng.choice([1.0, 0.0, -1.0], size=(d, m), p=[1 / 6, 2 / 3, 1 / 6])
        matrix = np.sqrt(3.0 / d) * signs
    else:
        raise BadParameter(f"unknown projector kind {kind!r}")
    return RandomProjector(matrix, kind=kind, seed=seed)


def project(state: RandomProjector, x) -> np.ndarray:
    return state.project(x)
