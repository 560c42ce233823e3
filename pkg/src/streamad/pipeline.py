"""Chaining preprocess, project, detect, ensemble, postprocess and calibrate."""

from __future__ import annotations

import copy
from typing import Optional, Sequence

import numpy as np

from streamad.core import BaseDetector, _batch_arrays, as_vector
from streamad.ensemble import Ensembler
from streamad.errors import BadParameter, StreamError


class Pipeline:
    """Streaming pipeline; every stage except the detectors is optional.

    ``fit_score_partial`` pushes one instance through, in order: the
    preprocessor, the projector, each detector's ``fit_score_partial``, the
    ensembler, every postprocessor, then the calibrator. Stage errors carry
    the stage name in ``err.stage``.
    """

    def __init__(self, detectors, preprocessor=None, projector=None,
                 ensembler: Optional[Ensembler] = None,
                 postprocessors: Sequence = (), calibrator=None):
        if isinstance(detectors, BaseDetector):
            detectors = [detectors]
        self.detectors = list(detectors)
        if not self.detectors:
            raise BadParameter("a pipeline needs at least one detector")
        if len(self.detectors) > 1 and ensembler is None:
            raise BadParameter("several detectors need an ensembler")
        self.preprocessor = preprocessor
        self.projector = projector
        self.ensembler = ensembler
        self.postprocessors = list(postprocessors)
        self.calibrator = calibrator

    @staticmethod
    def _stage(name, fn, *args):
        try:
            return fn(*args)
        except StreamError as err:
            if err.stage is None:
                err.stage = name
            raise

    def step(self, x, y=None) -> tuple[float, float]:
        """Process one instance; returns ``(raw_score, final_score)``.

        ``raw_score`` is the detector (or ensemble) output before any
        postprocessing or calibration.
        """
        v = as_vector(x)
        if self.preprocessor is not None:
            v = self._stage("preprocessor", self.preprocessor.fit_transform_partial, v)
        if self.projector is not None:
            v = self._stage("projector", self.projector.fit_transform_partial, v)
        scores = [
            self._stage(f"detector[{i}]", det.fit_score_partial, v, y)
            for i, det in enumerate(self.detectors)
        ]
        if self.ensembler is not None:
            raw = self._stage("ensemble", self.ensembler.combine, scores)
        else:
            raw = scores[0]
        final = raw
        for j, post in enumerate(self.postprocessors):
            final = self._stage(f"postprocessor[{j}]", post.fit_transform_partial, final)
        if self.calibrator is not None:
            final = self._stage("calibrator", self.calibrator.fit_transform_partial, final)
        return raw, final

    def fit_score_partial(self, x, y=None) -> float:
        return self.step(x, y)[1]

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

    def clone(self) -> "Pipeline":
        return copy.deepcopy(self)
