"""Order-statistic combiners for the scores of several detectors."""

import numpy as np

from streamad.core import Stateful, as_score
from streamad.errors import BadParameter, EmptyInput

STRATEGIES = ("average", "maximum", "median")


def combine(scores, strategy: str = "average") -> float:
    """Combine one instance's detector scores into a single score.

    Raw scores of different detectors live on different scales; calibrate or
    standardize them first if they are to be averaged meaningfully.
    """
    values = [as_score(s) for s in scores]
    if not values:
        raise EmptyInput("combine needs at least one score")
    if strategy == "average":
        return float(np.mean(values))
    if strategy == "maximum":
        return max(values)
    if strategy == "median":
        return float(np.median(values))
    raise BadParameter(f"unknown ensemble strategy {strategy!r}; expected one of {STRATEGIES}")


class Ensembler(Stateful):
    _param_names = ("strategy",)

    def __init__(self, strategy: str = "average"):
        if strategy not in STRATEGIES:
            raise BadParameter(f"unknown ensemble strategy {strategy!r}; expected one of {STRATEGIES}")
        self.strategy = strategy

    def combine(self, scores) -> float:
        return combine(scores, self.strategy)
