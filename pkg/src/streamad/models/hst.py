from copy import deepcopy
from functools import lru_cache

import numpy as np

from streamad.core import BaseDetector
from streamad.errors import BadParameter


class HalfSpaceTrees(BaseDetector):
    """Streaming Half-Space Trees with alternating reference/latest windows.

    Every tree is a complete binary tree of ``depth`` levels of midpoint
    splits on a randomly chosen dimension, built inside a randomly perturbed
    workspace. Nodes are stored heap-style (children of ``i`` are ``2i+1``
    and ``2i+2``), so the structure is a pure function of the seed and the
    dimension and is rebuilt rather than serialized.

    Training increments the latest mass ``l`` of every node on the
    instance's path. After every ``window`` instances the latest masses
    become the reference masses ``r`` and ``l`` restarts from zero. Scoring
    reads ``r``: the mass of a tree is ``r(node) * 2**depth(node)`` at the
    terminal node, which is the leaf unless the descent stops earlier at the
    first node with ``r < size_limit``. The anomaly score is the negated mass
    summed over trees.

    Until the first window completes there is no reference yet, so scores
    come from the partial latest masses rescaled by ``window / counter``.

    Features are assumed to be on a standardized scale (see
    :class:`streamad.transform.RunningStandardizer`); ``limits`` sets that
    scale.

    Parameters
    ----------
    trees, depth, window : int
        Number of trees, tree height and window length.
    limits : (float, float)
        Expected feature range used to place the workspaces.
    size_limit : float, optional
        Minimum reference mass for descending further. Defaults to
        ``0.1 * window``; 0 always scores at the leaf.
    workspace : (array-like, array-like), optional
        Explicit per-dimension ``(min, max)`` shared by every tree, replacing
        the random perturbation.
    """

    _param_names = ("trees", "depth", "window", "limits", "size_limit", "seed", "workspace")
    _state_names = ("r", "l", "counter")

    def __init__(self, trees: int = 25, depth: int = 15, window: int = 250,
                 limits=(-3.0, 3.0), size_limit=None, seed: int = 0,
                 workspace=None):
        super().__init__(seed)
        if trees < 1 or window < 1:
            raise BadParameter("trees and window must be >= 1")
        if not 0 <= depth <= 20:
            raise BadParameter(f"depth must lie in [0, 20], got {depth}")
        lo, hi = (float(v) for v in limits)
        if not hi > lo:
            raise BadParameter(f"limits need hi > lo, got {limits}")
        self.trees = int(trees)
        self.depth = int(depth)
        self.window = int(window)
        self.limits = (lo, hi)
        self.size_limit = 0.1 * self.window if size_limit is None else float(size_limit)
        self.workspace = None
        if workspace is not None:
            wmin, wmax = (np.asarray(v, dtype=np.float64).reshape(-1) for v in workspace)
            if wmin.shape != wmax.shape or np.any(wmax <= wmin):
                raise BadParameter("workspace needs matching shapes and max > min")
            self.workspace = (wmin, wmax)
        self.n_nodes = 2 ** (self.depth + 1) - 1
        self.r = None
        self.l = None
        self.counter = 0
        self._cache = None

    def _build(self, m):
        if self.workspace is not None:
            if len(self.workspace[0]) != m:
                raise BadParameter(f"workspace has {len(self.workspace[0])} dims, data has {m}")
            self.ws_min = np.tile(self.workspace[0], (self.trees, 1))
            self.ws_max = np.tile(self.workspace[1], (self.trees, 1))
            self.dims, self._key = _layout(self.seed, self.trees, self.depth, m, None)
        else:
            lo, hi = self.limits
            s, self.dims, self._key = _layout(self.seed, self.trees, self.depth, m, self.limits)
            half = 2.0 * np.maximum(s - lo, hi - s)
            self.ws_min = s - half
            self.ws_max = s + half
        self._width = self.ws_max - self.ws_min
        self._rows = np.arange(self.trees)
        self._row_off = self._rows * self.dims.shape[1]
        self._scale = 2.0 ** np.repeat(np.arange(self.depth + 1), 2 ** np.arange(self.depth + 1))
        self._cache = None

    def _bind(self, m):
        self._build(m)
        self.r = np.zeros((self.trees, self.n_nodes), dtype=np.int32)
        self.l = np.zeros((self.trees, self.n_nodes), dtype=np.int32)

    def _route(self, x):
        """Node ids on the root-to-leaf path of ``x`` in every tree."""
        key = x.tobytes()
        if self._cache is not None and self._cache[0] == key:
            return self._cache[1]
        D = self.depth
        path = np.zeros((self.trees, D + 1), dtype=np.int64)
        if D == 0:
            self._cache = (key, path)
            return path
        u = (x - self.ws_min) / self._width
        code = np.clip(np.floor(u * 2.0 ** D), 0, 2 ** D - 1).astype(np.int64)
        bits = ((code[:, :, None] >> np.arange(D)) & 1).ravel()
        keys = self._key
        off = self._row_off
        node = np.zeros(self.trees, dtype=np.int64)
        for d in range(D):
            node = 2 * node + 1 + bits[keys[off + node]]
            path[:, d + 1] = node
        self._cache = (key, path)
        return path

    def _fit(self, x):
        path = self._route(x)
        self.l[self._rows[:, None], path] += 1
        self.counter += 1
        if self.counter >= self.window:
            self.r = self.l
            self.l = np.zeros_like(self.r)
            self.counter = 0

    def mass(self, x) -> float:
        """Raw reference mass summed over trees (higher = more normal)."""
        x = self._check(x)
        if self.n_features is None:
            return 0.0
        return self._mass(x)

    def _mass(self, x):
        path = self._route(x)
        if self.instances_seen >= self.window:
            ref = self.r[self._rows[:, None], path]
        else:
            ref = self.l[self._rows[:, None], path] * (self.window / self.counter)
        if self.size_limit > 0:
            below = ref < self.size_limit
            # first node under the limit, or the leaf when none is
            stop = np.where(below.any(axis=1), below.argmax(axis=1), self.depth)
        else:
            stop = np.full(self.trees, self.depth)
        terminal = path[self._rows, stop]
        return float(np.sum(ref[self._rows, stop] * self._scale[terminal]))

    def _score(self, x):
        return -self._mass(x)

    def get_state(self):
        state = super().get_state()
        for name in ("r", "l"):
            arr = getattr(self, name)
            if arr is None:
                state[name] = None
                continue
            flat = arr.ravel()
            idx = np.flatnonzero(flat)
            state[name] = {"index": idx.astype(np.int64), "value": flat[idx]}
        return state

    def _restore(self):
        if self.n_features is None:
            self.r = self.l = None
            return
        self._build(self.n_features)
        for name in ("r", "l"):
            sparse = getattr(self, name)
            dense = np.zeros(self.trees * self.n_nodes, dtype=np.int32)
            dense[sparse["index"]] = sparse["value"]
            setattr(self, name, dense.reshape(self.trees, self.n_nodes))

    def __deepcopy__(self, memo):
        new = type(self).__new__(type(self))
        memo[id(self)] = new
        for k, v in self.__dict__.items():
            if k == "_cache":
                new._cache = None
            elif k in ("dims", "_rows", "_row_off", "_scale", "_width", "_key", "ws_min", "ws_max"):
                new.__dict__[k] = v  # immutable after construction
            else:
                new.__dict__[k] = deepcopy(v, memo)
        return new


@lru_cache(maxsize=16)
def _layout(seed, trees, depth, m, limits):
    """Seeded tree structure, shared read-only between equal detectors.

    Returns the workspace centres (only when ``limits`` is given), the split
    dimension of every internal node and each node's bit slot. Midpoint
    bisection on a dimension reads successive bits of that coordinate's
    position in the workspace, so the k-th split on dim q along a path tests
    bit k of q; ``key`` points at that bit in a flat (tree, q, bit) table.
    """
    rng = np.random.default_rng(seed)
    s = rng.uniform(limits[0], limits[1], size=(trees, m)) if limits is not None else None
    n_internal = 2 ** depth - 1
    dims = rng.integers(0, m, size=(trees, max(n_internal, 1)))
    occ = np.zeros_like(dims)
    anc = np.arange(dims.shape[1])
    for k in range(1, depth):
        # nodes at depth >= k are the contiguous range [2^k - 1, n_internal)
        first = 2 ** k - 1
        anc = (anc - 1) // 2
        occ[:, first:] += dims[:, anc[first:]] == dims[:, first:]
    key = (dims * depth + (depth - 1 - occ) + (np.arange(trees) * m * depth)[:, None]).ravel()
    out = (dims, key) if s is None else (s, dims, key)
    for arr in out:
        arr.setflags(write=False)
    return out
