"""Stream data model, state serialization and the incremental detector contract."""

from __future__ import annotations

import base64
import copy
import json
import math
from dataclasses import dataclass
from collections import deque
from typing import Optional, Sequence

import numpy as np

from streamad.errors import DimensionMismatch, NonFiniteInput, StreamError

STATE_FORMAT = "streamad.state"
STATE_VERSION = 1

_REGISTRY: dict[str, type] = {}


@dataclass(frozen=True)
class Instance:
    """One stream element.

    ``features`` is a float64 vector, ``label`` is 1 (anomalous), 0 (normal)
    or None, and ``index`` is the arrival position.
    """

    features: np.ndarray
    label: Optional[int] = None
    index: int = 0

    def __iter__(self):
        # Lets callers write ``for x, y in stream``.
        yield self.features
        yield self.label

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.label == other.label
            and self.index == other.index
            and np.array_equal(self.features, other.features)
        )

    __hash__ = None


class StreamBatch:
    """An ordered, finite run of instances sharing one dimension."""

    def __init__(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DimensionMismatch(f"batch must be 2-D, got shape {X.shape}")
        self.X = X
        if y is not None:
            y = [None if v is None else int(v) for v in y]
            if len(y) != len(X):
                raise DimensionMismatch(f"{len(X)} rows but {len(y)} labels")
        self.y = y

    @classmethod
    def from_instances(cls, instances: Sequence[Instance]) -> "StreamBatch":
        if not instances:
            return cls(np.empty((0, 0)))
        return cls(
            np.vstack([inst.features for inst in instances]),
            [inst.label for inst in instances],
        )

    @property
    def n(self) -> int:
        return len(self.X)

    def __len__(self):
        return len(self.X)

    def __iter__(self):
        for t in range(len(self.X)):
            yield Instance(self.X[t], None if self.y is None else self.y[t], t)


def as_vector(x) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 vector."""
    if isinstance(x, Instance):
        x = x.features
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    elif v.ndim != 1:
        v = v.ravel()
    if v.size == 0:
        raise DimensionMismatch("empty feature vector")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput(f"non-finite feature value in {v.tolist()}")
    return v


def as_score(s) -> float:
    s = float(s)
    if not math.isfinite(s):
        raise NonFiniteInput(f"non-finite score {s}")
    return s


def _batch_arrays(X, y):
    if isinstance(X, StreamBatch):
        return X.X, X.y if y is None else y
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], Instance):
        b = StreamBatch.from_instances(X)
        return b.X, b.y if y is None else y
    try:
        X = np.asarray(X, dtype=np.float64)
    except ValueError:
        # ragged rows: keep them apart so the bad one is reported by index
        return list(X), y
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return X, y


# --------------------------------------------------------------------------
# serialization


def _encode(value):
    if isinstance(value, np.ndarray):
        arr = np.ascontiguousarray(value)
        return {
            "__ndarray__": arr.dtype.str,
            "shape": list(arr.shape),
            "data": base64.b64encode(arr.tobytes()).decode("ascii"),
        }
    if isinstance(value, deque):
        return {"__deque__": [_encode(v) for v in value], "maxlen": value.maxlen}
    if isinstance(value, tuple):
        return {"__tuple__": [_encode(v) for v in value]}
    if isinstance(value, list):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _decode(value):
    if isinstance(value, list):
        return [_decode(v) for v in value]
    if isinstance(value, dict):
        if "__ndarray__" in value:
            raw = base64.b64decode(value["data"])
            arr = np.frombuffer(raw, dtype=np.dtype(value["__ndarray__"]))
            return arr.reshape(value["shape"]).copy()
        if "__deque__" in value:
            return deque((_decode(v) for v in value["__deque__"]), maxlen=value["maxlen"])
        if "__tuple__" in value:
            return tuple(_decode(v) for v in value["__tuple__"])
        return {k: _decode(v) for k, v in value.items()}
    return value


class Stateful:
    """Mixin giving a component cloning and a versioned serialized form.

    Subclasses list their constructor arguments in ``_param_names`` (stored
    under the same attribute names) and their mutable state in
    ``_state_names``. Every registered subclass round-trips through
    :func:`serialize` / :func:`deserialize`.
    """

    _param_names: tuple = ()
    _state_names: tuple = ()

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        _REGISTRY[cls.__name__] = cls

    def get_params(self) -> dict:
        return {name: getattr(self, name) for name in self._param_names}

    def get_state(self) -> dict:
        return {name: getattr(self, name) for name in self._state_names}

    def set_state(self, state: dict) -> None:
        for name in self._state_names:
            setattr(self, name, state[name])
        self._restore()

    def _restore(self) -> None:
        """Rebuild derived (non-serialized) attributes after ``set_state``."""

    def clone(self):
        return copy.deepcopy(self)

    def to_bytes(self) -> bytes:
        return serialize(self)


def serialize(obj: Stateful) -> bytes:
    doc = {
        "format": STATE_FORMAT,
        "version": STATE_VERSION,
        "type": type(obj).__name__,
        "params": _encode(obj.get_params()),
        "state": _encode(obj.get_state()),
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def deserialize(blob: bytes) -> Stateful:
    doc = json.loads(blob)
    if doc.get("format") != STATE_FORMAT:
        raise ValueError("not a streamad state blob")
    if doc.get("version") != STATE_VERSION:
        raise ValueError(f"unsupported state version {doc.get('version')}")
    cls = _REGISTRY.get(doc["type"])
    if cls is None:
        raise ValueError(f"unknown component type {doc['type']!r}")
    obj = cls(**_decode(doc["params"]))
    obj.set_state(_decode(doc["state"]))
    return obj


# --------------------------------------------------------------------------
# detector contract


class BaseDetector(Stateful):
    """Streaming detector: subclasses supply ``_bind``, ``_fit`` and ``_score``.

    The dimension ``m`` is bound by the first ``fit_partial``. Labels are
    accepted everywhere and ignored; all detectors here are unsupervised.
    Scores follow the library convention: higher means more anomalous.
    """

    memory_budget: float = 0

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.n_features: Optional[int] = None
        self.instances_seen = 0

    def get_state(self) -> dict:
        state = super().get_state()
        state["n_features"] = self.n_features
        state["instances_seen"] = self.instances_seen
        return state

    def set_state(self, state: dict) -> None:
        self.n_features = state["n_features"]
        self.instances_seen = state["instances_seen"]
        super().set_state(state)

    @property
    def retained_instances(self) -> int:
        """Raw instances currently held in memory."""
        return 0

    def _check(self, x) -> np.ndarray:
        v = as_vector(x)
        if self.n_features is not None and v.size != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {v.size}"
            )
        return v

    def _bind(self, m: int) -> None:
        pass

    def _fit(self, x: np.ndarray) -> None:
        raise NotImplementedError

    def _score(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def fit_partial(self, x, y=None):
        v = self._check(x)
        if self.n_features is None:
            self.n_features = v.size
            self._bind(v.size)
        self._fit(v)
        self.instances_seen += 1
        return self

    def score_partial(self, x) -> float:
        v = self._check(x)
        if self.n_features is None:
            return 0.0
        s = float(self._score(v))
        # Normalize negative zero so serialized scores are stable.
        return s + 0.0

    def fit_score_partial(self, x, y=None) -> float:
        self.fit_partial(x, y)
        return self.score_partial(x)

    def fit(self, X, y=None):
        X, y = _batch_arrays(X, y)
        for t in range(len(X)):
            try:
                self.fit_partial(X[t], None if y is None else y[t])
            except StreamError as err:
                err.index = t
                raise
        return self

    def score(self, X) -> np.ndarray:
        X, _ = _batch_arrays(X, None)
        out = np.empty(len(X))
        for t in range(len(X)):
            try:
                out[t] = self.score_partial(X[t])
            except StreamError as err:
                err.index = t
                err.partial_scores = out[:t].copy()
                raise
        return out

    def fit_score(self, X, y=None) -> np.ndarray:
        X, y = _batch_arrays(X, y)
        out = np.empty(len(X))
        for t in range(len(X)):
            try:
                out[t] = self.fit_score_partial(X[t], None if y is None else y[t])
            except StreamError as err:
                err.index = t
                err.partial_scores = out[:t].copy()
                raise
        return out

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items()
                         if not isinstance(v, np.ndarray))
        return f"{type(self).__name__}({args})"

