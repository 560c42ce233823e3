"""Minimal library loop: LODA scored prequentially on the synthetic stream.

    python scripts/prequential_loop.py [--seed 42] [--n 1000]
"""

import argparse
import time

from streamad import LODA
from streamad.evaluation import AUROCMetric
from streamad.stream import generate_synthetic


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--n", type=int, default=1000)
    args = parser.parse_args()

    # same seed derivation as the CLI: detector 0 gets seed + 2
    model = LODA(seed=args.seed + 2)
    metric = AUROCMetric()
    start = time.perf_counter()
    for x, y in generate_synthetic(args.n, 2, 0.05, args.seed):
        metric.update(y, model.fit_score_partial(x))
    elapsed = time.perf_counter() - start
    print(f"Area under ROC metric is {metric.get():.9g}. ({args.n} instances, {elapsed:.2f} s)")


if __name__ == "__main__":
    main()
