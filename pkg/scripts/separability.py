"""Per-detector prequential AUROC and throughput on the synthetic stream.

    python scripts/separability.py [--seeds 42 43 44] [--n 1000] [--m 2]
"""

import argparse
import time

import numpy as np

from streamad import LODA, HalfSpaceTrees, MeanDeviation, RunningMahalanobis, SlidingWindowKNN
from streamad.evaluation import AUROCMetric
from streamad.stream import generate_synthetic

DETECTORS = {
    "loda": LODA,
    "hst": HalfSpaceTrees,
    "knn": SlidingWindowKNN,
    "mahalanobis": RunningMahalanobis,
    "meandev": MeanDeviation,
}


def prequential(detector, stream):
    metric = AUROCMetric()
    for x, y in stream:
        metric.update(y, detector.fit_score_partial(x))
    return metric.get()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, nargs="+", default=[42, 43, 44, 45, 46])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--m", type=int, default=2)
    parser.add_argument("--rate", type=float, default=0.05)
    args = parser.parse_args()

    print(f"{'detector':<12} {'mean AUROC':>10} {'min':>8} {'max':>8} {'inst/s':>9}")
    for name, cls in DETECTORS.items():
        values, rate = [], []
        for seed in args.seeds:
            stream = list(generate_synthetic(args.n, args.m, args.rate, seed))
            start = time.perf_counter()
            values.append(prequential(cls(seed=seed + 2), stream))
            rate.append(args.n / (time.perf_counter() - start))
        v = np.array(values)
        print(f"{name:<12} {v.mean():>10.4f} {v.min():>8.4f} {v.max():>8.4f} {np.mean(rate):>9.0f}")


if __name__ == "__main__":
    main()
