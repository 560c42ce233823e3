import numpy as np
import pytest

from streamad import LODA, HalfSpaceTrees, MeanDeviation, RunningMahalanobis, SlidingWindowKNN

# Small configurations keep property tests fast while still crossing every
# internal phase boundary (LODA warmup, HST window swaps, kNN eviction).
SMALL = {
    "loda": lambda seed: LODA(k=7, bins=9, warmup=12, seed=seed),
    "hst": lambda seed: HalfSpaceTrees(trees=4, depth=5, window=10, seed=seed),
    "knn": lambda seed: SlidingWindowKNN(window=9, k=3, seed=seed),
    "mahalanobis": lambda seed: RunningMahalanobis(seed=seed),
    "meandev": lambda seed: MeanDeviation(seed=seed),
}

DEFAULT = {
    "loda": lambda seed: LODA(seed=seed),
    "hst": lambda seed: HalfSpaceTrees(seed=seed),
    "knn": lambda seed: SlidingWindowKNN(seed=seed),
    "mahalanobis": lambda seed: RunningMahalanobis(seed=seed),
    "meandev": lambda seed: MeanDeviation(seed=seed),
}


@pytest.fixture(params=sorted(SMALL))
def small_factory(request):
    return SMALL[request.param]


def random_stream(seed, n, m):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    # sprinkle a few far points so every detector sees both regimes
    mask = rng.random(n) < 0.05
    X[mask] = rng.uniform(-6, 6, size=(mask.sum(), m))
    return X
