import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_stream
from streamad import LODA, HalfSpaceTrees, MeanDeviation, RunningMahalanobis, SlidingWindowKNN


# --- LODA -------------------------------------------------------------------

def loda_bin(value, lo, hi, bins):
    """Bin lookup by scanning explicit edges; edge bins absorb overflow."""
    edges = np.linspace(lo, hi, bins + 1)
    for j in range(bins - 1, 0, -1):
        if value >= edges[j]:
            return j
    return 0


def loda_oracle(weights, lo, hi, bins, absorbed, query):
    total = 0.0
    for i in range(len(weights)):
        qb = loda_bin(weights[i] @ query, lo[i], hi[i], bins)
        count = sum(loda_bin(weights[i] @ r, lo[i], hi[i], bins) == qb for r in absorbed)
        total += math.log((count + 1) / (len(absorbed) + bins))
    return -total / len(weights)


@pytest.fixture
def hook_loda():
    det = LODA(k=1, bins=10, projections=[[1.0]], limits=([0.0], [10.0]))
    for v in (1.0, 1.0, 1.0):
        det.fit_partial([v])
    return det


def test_loda_hook_occupied_bin(hook_loda):
    assert hook_loda.score_partial([1.0]) == pytest.approx(-math.log(4 / 13), abs=1e-12)
    assert hook_loda.score_partial([1.0]) == pytest.approx(1.1787, abs=1e-4)


def test_loda_hook_empty_bin(hook_loda):
    assert hook_loda.score_partial([9.0]) == pytest.approx(-math.log(1 / 13), abs=1e-12)
    assert hook_loda.score_partial([9.0]) == pytest.approx(2.5649, abs=1e-4)


def test_loda_clamps_to_edge_bin(hook_loda):
    assert hook_loda.bin_index(np.array([10.5]))[0] == hook_loda.bin_index(np.array([9.5]))[0] == 9
    assert hook_loda.score_partial([10.5]) == hook_loda.score_partial([9.5])
    assert hook_loda.score_partial([-3.0]) == hook_loda.score_partial([0.5])


def test_loda_projection_sparsity():
    det = LODA(k=50, seed=3).fit_partial(np.zeros(10))
    nnz = np.count_nonzero(det.weights, axis=1)
    assert np.all(nnz == math.ceil(math.sqrt(10)))


def test_loda_warmup_sets_edges_and_clears_buffer():
    X = random_stream(0, 30, 3)
    det = LODA(k=4, bins=5, warmup=20, seed=1)
    det.fit(X[:19])
    assert not det.warmed_up and det.retained_instances == 19
    det.fit_partial(X[19])
    assert det.warmed_up and det.retained_instances == 0
    z = X[:20] @ det.weights.T
    span = z.max(axis=0) - z.min(axis=0)
    np.testing.assert_allclose(det.lo, z.min(axis=0) - 0.1 * span, rtol=0, atol=1e-12)
    np.testing.assert_allclose(det.hi, z.max(axis=0) + 0.1 * span, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(det.totals, 20)
    np.testing.assert_array_equal(det.counts.sum(axis=1), 20)


def test_loda_warmup_scores():
    det = LODA(k=2, bins=4, warmup=50)
    assert det.fit_score_partial([1.0]) == 0.0  # fewer than two buffered values
    det.fit_partial([3.0])
    s = det.score_partial([1.0])
    assert math.isfinite(s) and s > 0
    # far outside the buffered range: still finite
    assert math.isfinite(det.score_partial([1e6]))


def test_loda_constant_projection_range():
    det = LODA(k=3, bins=4, warmup=5).fit(np.ones((5, 2)))
    assert np.all(det.hi > det.lo)
    assert math.isfinite(det.score_partial([1.0, 1.0]))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(30, 200), m=st.integers(1, 6))
def test_loda_matches_bin_count_oracle(seed, n, m):
    X = random_stream(seed, n + 10, m)
    det = LODA(k=5, bins=20, warmup=25, seed=seed).fit(X[:n])
    for q in X[n:]:
        expected = loda_oracle(det.weights, det.lo, det.hi, det.bins, X[:n], q)
        assert det.score_partial(q) == pytest.approx(expected, abs=1e-12)


# --- Half-Space Trees -------------------------------------------------------

def test_hst_depth_zero_scores_equal():
    det = HalfSpaceTrees(trees=1, depth=0, window=3, seed=0)
    det.fit(random_stream(1, 10, 2))
    scores = {det.score_partial(x) for x in random_stream(2, 10, 2)}
    assert len(scores) == 1


def test_hst_hand_mass():
    det = HalfSpaceTrees(trees=1, depth=1, window=3, workspace=([0.0], [1.0]))
    det.fit([[0.1], [0.2], [0.9]])
    assert det.score_partial([0.3]) == -4.0
    assert det.score_partial([0.8]) == -2.0
    assert det.score_partial([0.8]) > det.score_partial([0.3])


def test_hst_window_swap():
    det = HalfSpaceTrees(trees=3, depth=4, window=7, seed=2)
    det.fit(random_stream(0, 7, 2))
    np.testing.assert_array_equal(det.r[:, 0], 7)
    assert det.l.sum() == 0
    assert det.counter == 0


def test_hst_cold_window_uses_rescaled_latest_mass():
    det = HalfSpaceTrees(trees=1, depth=1, window=4, size_limit=0, workspace=([0.0], [1.0]))
    det.fit([[0.1], [0.2]])
    # two of two latest instances in the left leaf, rescaled to a window of 4
    assert det.score_partial([0.3]) == -(2 * 4 / 2) * 2


def route_oracle(det, tree, x):
    lo, hi = det.ws_min[tree].tolist(), det.ws_max[tree].tolist()
    node, path = 0, [0]
    for _ in range(det.depth):
        q = int(det.dims[tree, node])
        mid = (lo[q] + hi[q]) / 2
        if x[q] < mid:
            hi[q], node = mid, 2 * node + 1
        else:
            lo[q], node = mid, 2 * node + 2
        path.append(node)
    return path


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 1000), windows=st.integers(1, 4), extra=st.integers(0, 9))
def test_hst_reference_mass_oracle(seed, windows, extra):
    w = 10
    X = random_stream(seed, w * windows + extra, 2)
    det = HalfSpaceTrees(trees=3, depth=4, window=w, size_limit=0, seed=seed).fit(X)
    previous = X[w * (windows - 1): w * windows]
    for tree in range(det.trees):
        expected = np.zeros(det.n_nodes, dtype=int)
        for x in previous:
            for node in route_oracle(det, tree, x):
                expected[node] += 1
        np.testing.assert_array_equal(det.r[tree], expected)
        leaves = det.r[tree, 2 ** det.depth - 1:]
        assert leaves.sum() == w
    q = X[0]
    mass = sum(det.r[t, route_oracle(det, t, q)[-1]] * 2 ** det.depth for t in range(det.trees))
    assert det.score_partial(q) == -mass


def test_hst_size_limit_stops_early():
    det = HalfSpaceTrees(trees=1, depth=2, window=4, size_limit=2, workspace=([0.0], [1.0]))
    det.fit([[0.1], [0.2], [0.3], [0.9]])
    # right child of the root holds one instance < 2: stop there (depth 1)
    assert det.score_partial([0.9]) == -(1 * 2)
    # left path: root 4, left 3, leaf [0, .25) holds 2 -> leaf at depth 2
    assert det.score_partial([0.1]) == -(2 * 4)


# --- kNN --------------------------------------------------------------------

def test_knn_nearest():
    det = SlidingWindowKNN(window=10, k=1).fit([[0.0], [10.0]])
    assert det.score_partial([4.0]) == 4.0


def test_knn_duplicate_and_empty():
    det = SlidingWindowKNN(window=10, k=1)
    assert det.score_partial([3.0]) == 0.0
    det.fit_partial([3.0])
    assert det.score_partial([3.0]) == 0.0


def knn_oracle(history, w, k, q):
    window = history[-w:]
    d = sorted(math.dist(p, q) for p in window)
    if not d:
        return 0.0
    top = d[: min(k, len(d))]
    return sum(top) / len(top)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), w=st.integers(1, 20), k=st.integers(1, 8),
       m=st.integers(1, 5), n=st.integers(0, 60))
def test_knn_matches_all_pairs_oracle(seed, w, k, m, n):
    X = random_stream(seed, n + 5, m)
    det = SlidingWindowKNN(window=w, k=k).fit(X[:n])
    assert len(det.buffer) == min(n, w)
    for q in X[n:]:
        assert det.score_partial(q) == pytest.approx(knn_oracle(list(X[:n]), w, k, q), abs=1e-12)


# --- Mahalanobis ------------------------------------------------------------

def test_mahalanobis_zero_at_mean():
    X = random_stream(3, 40, 3)
    det = RunningMahalanobis().fit(X)
    assert det.score_partial(det.mean) == 0.0


def test_mahalanobis_identity_hook_is_euclidean():
    X = random_stream(3, 40, 3)
    det = RunningMahalanobis().fit(X)
    det.covariance_override = np.eye(3)
    q = np.array([1.0, -2.0, 0.5])
    assert det.score_partial(q) == pytest.approx(np.linalg.norm(q - det.mean), abs=1e-12)


def test_mahalanobis_univariate_hand():
    det = RunningMahalanobis().fit([[1.0], [3.0]])
    assert det.mean[0] == 2.0 and det.covariance[0, 0] == 1.0
    assert det.score_partial([4.0]) == pytest.approx(2 / math.sqrt(1 + 1e-6), abs=1e-12)
    assert det.score_partial([4.0]) == pytest.approx(2.0, abs=1e-5)


def test_mahalanobis_single_instance_uses_regularizer_only():
    det = RunningMahalanobis().fit_partial([0.0, 0.0])
    assert np.all(det.covariance == 0)
    assert det.score_partial([1e-3, 0.0]) == pytest.approx(1e-3 / math.sqrt(1e-6))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), m=st.integers(1, 6))
def test_mahalanobis_covariance_two_pass_oracle(seed, m):
    X = random_stream(seed, 80, m) * 3.0 + 5.0
    det = RunningMahalanobis()
    for t, x in enumerate(X, start=1):
        det.fit_partial(x)
        np.testing.assert_allclose(det.mean, X[:t].mean(axis=0), rtol=0, atol=1e-9)
        if t >= 2:
            oracle = np.cov(X[:t].T, bias=True).reshape(m, m)
            np.testing.assert_allclose(det.covariance, oracle, rtol=0, atol=1e-9)
        np.testing.assert_array_equal(det.cov_acc, det.cov_acc.T)


# --- MeanDeviation ----------------------------------------------------------

def test_meandev_examples():
    det = MeanDeviation()
    assert det.score_partial([7.0]) == 0.0
    det.fit([[1.0], [3.0]])
    assert det.score_partial([2.0]) == 0.0
    assert det.score_partial([4.0]) == 2.0


def test_meandev_multivariate_average():
    det = MeanDeviation().fit([[1.0, 0.0], [3.0, 4.0]])
    # dims: |4-2|/1 = 2 and |2-2|/2 = 0 -> mean 1
    assert det.score_partial([4.0, 2.0]) == 1.0


def test_meandev_constant_stream_uses_floor():
    det = MeanDeviation().fit([[5.0]] * 4)
    assert det.score_partial([5.0]) == 0.0
    assert det.score_partial([5.0 + 1e-9]) == pytest.approx(1.0, rel=1e-6)
