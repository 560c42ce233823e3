"""Instance streams from CSV files and a seeded synthetic generator."""

from __future__ import annotations

import csv
import math
from typing import Iterator, Optional, Union

import numpy as np

from streamad.core import Instance
from streamad.errors import BadParameter, RowParse

LabelColumn = Union[int, str, None]


class StreamSource:
    """An ordered, re-iterable source of instances with a fixed dimension.

    Iterating a source yields :class:`Instance` objects, which unpack as
    ``(features, label)``::

        for x, y in source:
            ...
    """

    kind = "abstract"

    def __init__(self, m: int, has_labels: bool, seed: Optional[int] = None):
        self.m = m
        self.has_labels = has_labels
        self.seed = seed

    def _rows(self) -> Iterator[tuple]:
        raise NotImplementedError

    def __iter__(self) -> Iterator[Instance]:
        for t, (x, y) in enumerate(self._rows()):
            yield Instance(x, y, t)


class CsvSource(StreamSource):
    kind = "csv"

    def __init__(self, path, label_column: LabelColumn = "last", has_header: bool = False):
        self.path = str(path)
        self.label_column = label_column
        self.has_header = has_header
        self.header = None
        width = None
        # Open eagerly so a missing file fails at construction.
        with open(self.path, newline="") as fh:
            for line_no, row in self._numbered(csv.reader(fh)):
                width = len(row)
                break
        if width is None:
            raise RowParse(1, "no data rows")
        self.width = width
        self._label_pos = self._resolve_label(label_column, width)
        m = width - (self._label_pos is not None)
        if m < 1:
            raise RowParse(1, "no feature columns left after removing the label")
        super().__init__(m, self._label_pos is not None)

    @staticmethod
    def _resolve_label(label_column, width):
        if label_column is None or label_column == "none":
            return None
        if label_column == "last":
            return width - 1
        try:
            pos = int(label_column)
        except (TypeError, ValueError):
            raise BadParameter(f"label_column must be 'last', 'none' or an int, got {label_column!r}")
        if not -width <= pos < width:
            raise BadParameter(f"label column {pos} out of range for {width} columns")
        return pos % width

    def _numbered(self, reader):
        for i, row in enumerate(reader):
            line_no = reader.line_num
            if i == 0 and self.has_header:
                self.header = row
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            yield line_no, row

    def _rows(self):
        with open(self.path, newline="") as fh:
            for line_no, row in self._numbered(csv.reader(fh)):
                if len(row) != self.width:
                    raise RowParse(line_no, f"expected {self.width} columns, got {len(row)}")
                label = None
                cells = row
                if self._label_pos is not None:
                    raw = row[self._label_pos].strip()
                    if raw not in ("0", "1"):
                        raise RowParse(line_no, f"label must be 0 or 1, got {raw!r}")
                    label = int(raw)
                    cells = row[:self._label_pos] + row[self._label_pos + 1:]
                try:
                    values = [float(c) for c in cells]
                except ValueError as err:
                    raise RowParse(line_no, str(err)) from None
                if not all(math.isfinite(v) for v in values):
                    raise RowParse(line_no, "non-finite feature value")
                yield np.array(values), label


class SyntheticSource(StreamSource):
    """Labeled Gaussian inliers mixed with uniform-box anomalies.

    Each instance is independently anomalous with probability
    ``anomaly_rate``. Inliers are standard normal in ``R^m``; anomalies are
    uniform on ``[-6, 6]^m``.
    """

    kind = "synthetic"

    def __init__(self, n: int, m: int, anomaly_rate: float, seed: int = 0):
        if n < 1 or m < 1:
            raise BadParameter(f"need n >= 1 and m >= 1, got n={n}, m={m}")
        if not 0.0 <= anomaly_rate <= 1.0:
            raise BadParameter(f"anomaly_rate must lie in [0, 1], got {anomaly_rate}")
        super().__init__(m, True, seed)
        self.n = n
        self.anomaly_rate = anomaly_rate
        rng = np.random.default_rng(seed)
        labels = rng.random(n) < anomaly_rate
        inliers = rng.standard_normal((n, m))
        outliers = rng.uniform(-6.0, 6.0, size=(n, m))
        self.X = np.where(labels[:, None], outliers, inliers)
        self.y = labels.astype(np.int64)

    def _rows(self):
        for t in range(self.n):
            yield self.X[t].copy(), int(self.y[t])


def read_csv_stream(path, label_column: LabelColumn = "last", has_header: bool = False) -> CsvSource:
    return CsvSource(path, label_column=label_column, has_header=has_header)


def generate_synthetic(n: int, m: int, anomaly_rate: float, seed: int = 0) -> SyntheticSource:
    return SyntheticSource(n, m, anomaly_rate, seed)


def iterate(source: StreamSource, shuffle: bool = False, seed: int = 0) -> Iterator[Instance]:
    """Yield the instances of ``source``, optionally in a seeded random order.

    Shuffling materializes the stream; indices are reassigned ``0..n-1`` in
    the yielded order.
    """
    if not shuffle:
        yield from source
        return
    items = list(source)
    order = np.random.default_rng(seed).permutation(len(items))
    for t, i in enumerate(order):
        yield Instance(items[i].features, items[i].label, t)
