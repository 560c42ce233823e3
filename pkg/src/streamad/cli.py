"""Command-line runner: stream -> pipeline -> prequential AUROC -> files.

Exit codes: 0 success, 1 config error, 2 I/O error, 3 runtime stage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, replace
from typing import Optional

from streamad.config import (
    InputSpec,
    RunConfig,
    build_metric,
    build_pipeline,
    build_source,
    load_config,
)
from streamad.errors import ConfigError, MetricUndefined, StreamError
from streamad.stream import generate_synthetic, iterate

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_RUNTIME = 0, 1, 2, 3
SCORES_HEADER = ["index", "raw_score", "final_score", "label"]


def fmt(value: float) -> str:
    """Fixed 9-significant-digit rendering used in every output file."""
    return format(value, ".9g")


@dataclass
class RunResult:
    n: int
    metric_value: Optional[float]
    seconds: float
    report: dict


def run(config: RunConfig, timing: bool = False, echo=print) -> RunResult:
    """Run the configured pipeline over the configured stream.

    Each instance is scored with the pipeline's ``fit_score_partial``;
    labelled instances also update the AUROC metric. The scores file is
    written row by row, so a failure leaves every completed row on disk.
    """
    start = time.perf_counter()
    source = build_source(config.input, config.seed)
    pipeline = build_pipeline(config.pipeline, source.m, config.seed)
    metric = build_metric(config)

    n = 0
    scores_fh = open(config.scores_path, "w", newline="") if config.scores_path else None
    try:
        writer = None
        if scores_fh is not None:
            writer = csv.writer(scores_fh, lineterminator="\n")
            writer.writerow(SCORES_HEADER)
        for inst in iterate(source, shuffle=config.shuffle, seed=config.seed):
            try:
                raw, final = pipeline.step(inst.features, inst.label)
            except StreamError as err:
                err.index = inst.index
                raise
            if inst.label is not None:
                metric.update(inst.label, final)
            if writer is not None:
                writer.writerow([inst.index, fmt(raw), fmt(final),
                                 "" if inst.label is None else inst.label])
            n += 1
    finally:
        if scores_fh is not None:
            scores_fh.close()

    try:
        value = metric.get()
    except MetricUndefined:
        value = None
    seconds = time.perf_counter() - start

    report = {
        "n": n,
        "metric_name": metric.name,
        "metric_value": "undefined" if value is None else value,
        "seconds": seconds if timing else None,
        "seed": config.seed,
        "config_digest": config.digest(),
        "config": config.echo(),
    }
    if config.report_path:
        with open(config.report_path, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    shown = "undefined" if value is None else fmt(value)
    echo(f"Area under ROC metric is {shown}. ({n} instances, {seconds:.2f} s)")
    return RunResult(n, value, seconds, report)


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_IO
    overrides = {}
    if args.seed is not None:
        if args.seed < 0:
            print("config error: seed: must be a nonnegative integer", file=sys.stderr)
            return EXIT_CONFIG
        overrides["seed"] = args.seed
    if args.input is not None:
        base = config.input if config.input.kind == "csv" else InputSpec("csv")
        overrides["input"] = replace(base, kind="csv", path=args.input)
    if args.scores is not None:
        overrides["scores_path"] = args.scores
    if args.report is not None:
        overrides["report_path"] = args.report
    config = replace(config, **overrides)

    try:
        run(config, timing=args.timing)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_IO
    except StreamError as err:
        print(f"runtime error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        source = generate_synthetic(args.n, args.m, args.rate, args.seed)
    except StreamError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = open(args.output, "w", newline="") if args.output != "-" else sys.stdout
    except OSError as err:
        print(f"io error: {err}", file=sys.stderr)
        return EXIT_IO
    writer = csv.writer(out, lineterminator="\n")
    for x, y in source:
        writer.writerow([repr(float(v)) for v in x] + [y])
    if out is not sys.stdout:
        out.close()
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="streamad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="score a stream with a configured pipeline")
    p_run.add_argument("config", help="YAML run configuration")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--input", help="read this CSV instead of the configured input")
    p_run.add_argument("--scores", help="scores CSV output path")
    p_run.add_argument("--report", help="JSON report output path")
    p_run.add_argument("--timing", action="store_true",
                       help="record wall time in the report (makes it non-reproducible)")
    p_run.set_defaults(func=_cmd_run)

    p_syn = sub.add_parser("synth", help="write the synthetic labelled stream as CSV")
    p_syn.add_argument("--n", type=int, default=1000)
    p_syn.add_argument("--m", type=int, default=2)
    p_syn.add_argument("--rate", type=float, default=0.05)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("-o", "--output", default="-")
    p_syn.set_defaults(func=_cmd_synth)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
