"""Run configuration: YAML schema, validation and pipeline construction.

Schema (every section except ``input`` and a detector is optional)::

    seed: 42                 # stream = seed, projector = seed + 1,
    shuffle: false           # detector i = seed + 2 + i
    input:
      synthetic: {n: 1000, m: 2, rate: 0.05}
      # or: csv: {path: data.csv, label_column: last, header: false}
    pipeline:
      preprocessor: unit_norm            # or standardize
      projector: {kind: gaussian, d: 4}  # or sparse
      detectors:                         # `detector: loda` for just one
        - {name: loda, k: 100, bins: 100, warmup: 256}
      ensemble: {strategy: average}      # required with > 1 detector
      postprocessors: [{name: ewma, alpha: 0.5}]
      calibrator: {name: conformal, window: 500}  # or gaussian_tail
    metric: {kind: auroc, window: null}
    output: {scores: scores.csv, report: report.json}

A top-level ``detector`` or ``detectors`` key is accepted as shorthand for
the pipeline entry.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import yaml

from streamad.ensemble import STRATEGIES, Ensembler
from streamad.errors import BadParameter, ConfigError
from streamad.evaluation import AUROCMetric
from streamad.models import LODA, HalfSpaceTrees, MeanDeviation, RunningMahalanobis, SlidingWindowKNN
from streamad.pipeline import Pipeline
from streamad.postprocess import EWMA, ConformalCalibrator, GaussianTailCalibrator
from streamad.stream import StreamSource, generate_synthetic, read_csv_stream
from streamad.transform import RunningStandardizer, UnitNormScaler, make_projector

INT, FLOAT, BOOL, STR = "int", "float", "bool", "str"

DETECTORS = {
    "loda": (LODA, {"k": INT, "bins": INT, "warmup": INT}),
    "hst": (HalfSpaceTrees, {"trees": INT, "depth": INT, "window": INT,
                             "limits": "pair", "size_limit": FLOAT}),
    "knn": (SlidingWindowKNN, {"window": INT, "k": INT}),
    "mahalanobis": (RunningMahalanobis, {"epsilon": FLOAT}),
    "meandev": (MeanDeviation, {}),
}
PREPROCESSORS = {"unit_norm": UnitNormScaler, "standardize": RunningStandardizer}
POSTPROCESSORS = {"ewma": (EWMA, {"alpha": FLOAT})}
CALIBRATORS = {
    "conformal": (ConformalCalibrator, {"window": INT}),
    "gaussian_tail": (GaussianTailCalibrator, {}),
}


@dataclass
class Component:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class InputSpec:
    kind: str
    n: Optional[int] = None
    m: Optional[int] = None
    rate: Optional[float] = None
    path: Optional[str] = None
    label_column: Any = "last"
    header: bool = False


@dataclass
class PipelineSpec:
    detectors: list
    preprocessor: Optional[str] = None
    projector: Optional[dict] = None
    ensemble: Optional[str] = None
    postprocessors: list = field(default_factory=list)
    calibrator: Optional[Component] = None


@dataclass
class RunConfig:
    input: InputSpec
    pipeline: PipelineSpec
    seed: int = 0
    shuffle: bool = False
    metric_window: Optional[int] = None
    scores_path: Optional[str] = None
    report_path: Optional[str] = None

    def echo(self) -> dict:
        """Experiment-defining part of the config (output paths excluded)."""
        return {
            "input": asdict(self.input),
            "pipeline": asdict(self.pipeline),
            "seed": self.seed,
            "shuffle": self.shuffle,
            "metric": {"kind": "auroc", "window": self.metric_window},
        }

    def digest(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# --------------------------------------------------------------------------
# validation helpers


def _mapping(value, key) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(key, f"expected a mapping, got {type(value).__name__}")
    return value


def _only(d: dict, allowed, key):
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}" if key else k, "unknown key")


def _typed(value, kind, key):
    if kind == INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if kind == FLOAT:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if kind == BOOL:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if kind == STR:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if kind == "pair":
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(key, f"expected a two-element list, got {value!r}")
        return [_typed(v, FLOAT, key) for v in value]
    raise AssertionError(kind)


def _component(entry, registry, key) -> Component:
    """Parse ``name`` or ``{name: ..., <param>: ...}`` against a registry."""
    if isinstance(entry, str):
        entry = {"name": entry}
    entry = _mapping(entry, key)
    if "name" not in entry:
        raise ConfigError(f"{key}.name", "missing")
    name = entry["name"]
    if name not in registry:
        raise ConfigError(f"{key}.name", f"unknown component {name!r}; expected one of {sorted(registry)}")
    schema = registry[name][1]
    params = {}
    for k, v in entry.items():
        if k == "name":
            continue
        if k not in schema:
            raise ConfigError(f"{key}.{k}", f"unknown parameter for {name}")
        params[k] = _typed(v, schema[k], f"{key}.{k}")
    return Component(name, params)


def _parse_input(raw, key="input") -> InputSpec:
    raw = _mapping(raw, key)
    _only(raw, ("synthetic", "csv"), key)
    if len(raw) != 1:
        raise ConfigError(key, "give exactly one of 'synthetic' or 'csv'")
    if "synthetic" in raw:
        syn = _mapping(raw["synthetic"], f"{key}.synthetic")
        _only(syn, ("n", "m", "rate"), f"{key}.synthetic")
        for req in ("n", "m", "rate"):
            if req not in syn:
                raise ConfigError(f"{key}.synthetic.{req}", "missing")
        spec = InputSpec(
            "synthetic",
            n=_typed(syn["n"], INT, f"{key}.synthetic.n"),
            m=_typed(syn["m"], INT, f"{key}.synthetic.m"),
            rate=_typed(syn["rate"], FLOAT, f"{key}.synthetic.rate"),
        )
        if spec.n < 1 or spec.m < 1:
            raise ConfigError(f"{key}.synthetic", "n and m must be >= 1")
        if not 0.0 <= spec.rate <= 1.0:
            raise ConfigError(f"{key}.synthetic.rate", "must lie in [0, 1]")
        return spec
    csv_raw = raw["csv"]
    if isinstance(csv_raw, str):
        csv_raw = {"path": csv_raw}
    csv_raw = _mapping(csv_raw, f"{key}.csv")
    _only(csv_raw, ("path", "label_column", "header"), f"{key}.csv")
    if "path" not in csv_raw:
        raise ConfigError(f"{key}.csv.path", "missing")
    label = csv_raw.get("label_column", "last")
    if label is None:
        label = "none"
    if not (label in ("last", "none") or (isinstance(label, int) and not isinstance(label, bool))):
        raise ConfigError(f"{key}.csv.label_column", f"expected 'last', 'none' or an integer, got {label!r}")
    return InputSpec(
        "csv",
        path=_typed(csv_raw["path"], STR, f"{key}.csv.path"),
        label_column=label,
        header=_typed(csv_raw.get("header", False), BOOL, f"{key}.csv.header"),
    )


def _parse_pipeline(raw, shorthand) -> PipelineSpec:
    raw = dict(_mapping(raw, "pipeline"))
    _only(raw, ("preprocessor", "projector", "detector", "detectors", "ensemble",
                "postprocessors", "calibrator"), "pipeline")
    if shorthand and ("detector" in raw or "detectors" in raw):
        raise ConfigError(next(iter(shorthand)), "detectors given both at top level and under pipeline")
    prefix = "" if shorthand else "pipeline."
    raw.update(shorthand)
    if "detector" in raw and "detectors" in raw:
        raise ConfigError(f"{prefix}detector", "use either 'detector' or 'detectors'")
    if "detector" in raw:
        entries, base = [raw["detector"]], f"{prefix}detector"
    elif "detectors" in raw:
        entries, base = raw["detectors"], f"{prefix}detectors"
        if not isinstance(entries, list) or not entries:
            raise ConfigError(base, "expected a non-empty list")
    else:
        raise ConfigError("pipeline.detectors", "at least one detector is required")
    detectors = [
        _component(e, DETECTORS, base if base.endswith("detector") else f"{base}[{i}]")
        for i, e in enumerate(entries)
    ]

    pre = raw.get("preprocessor")
    if pre is not None and pre not in PREPROCESSORS:
        raise ConfigError("pipeline.preprocessor", f"unknown preprocessor {pre!r}; expected one of {sorted(PREPROCESSORS)}")

    proj = raw.get("projector")
    if proj is not None:
        proj = _mapping(proj, "pipeline.projector")
        _only(proj, ("kind", "d"), "pipeline.projector")
        if "d" not in proj:
            raise ConfigError("pipeline.projector.d", "missing")
        kind = proj.get("kind", "gaussian")
        if kind not in ("gaussian", "sparse"):
            raise ConfigError("pipeline.projector.kind", f"expected gaussian or sparse, got {kind!r}")
        d = _typed(proj["d"], INT, "pipeline.projector.d")
        if d < 1:
            raise ConfigError("pipeline.projector.d", "must be >= 1")
        proj = {"kind": kind, "d": d}

    ens = raw.get("ensemble")
    if isinstance(ens, dict):
        _only(ens, ("strategy",), "pipeline.ensemble")
        ens = ens.get("strategy", "average")
    if ens is not None and ens not in STRATEGIES:
        raise ConfigError("pipeline.ensemble.strategy", f"expected one of {STRATEGIES}, got {ens!r}")
    if len(detectors) > 1 and ens is None:
        raise ConfigError("pipeline.ensemble", "required when more than one detector is configured")

    posts = raw.get("postprocessors") or []
    if not isinstance(posts, list):
        raise ConfigError("pipeline.postprocessors", "expected a list")
    posts = [_component(p, POSTPROCESSORS, f"pipeline.postprocessors[{j}]") for j, p in enumerate(posts)]

    cal = raw.get("calibrator")
    if cal is not None:
        cal = _component(cal, CALIBRATORS, "pipeline.calibrator")

    return PipelineSpec(detectors, pre, proj, ens, posts, cal)


def parse_config(raw: dict) -> RunConfig:
    raw = _mapping(raw, "<root>")
    _only(raw, ("seed", "shuffle", "input", "pipeline", "detector", "detectors",
                "metric", "output"), "")
    if "input" not in raw:
        raise ConfigError("input", "missing")
    seed = _typed(raw.get("seed", 0), INT, "seed")
    if seed < 0:
        raise ConfigError("seed", "must be a nonnegative integer")
    shorthand = {k: raw[k] for k in ("detector", "detectors") if k in raw}
    pipeline = _parse_pipeline(raw.get("pipeline") or {}, shorthand)

    metric = _mapping(raw.get("metric") or {}, "metric")
    _only(metric, ("kind", "window"), "metric")
    if metric.get("kind", "auroc") != "auroc":
        raise ConfigError("metric.kind", f"only 'auroc' is supported, got {metric['kind']!r}")
    window = metric.get("window")
    if window is not None:
        window = _typed(window, INT, "metric.window")
        if window < 1:
            raise ConfigError("metric.window", "must be >= 1")

    output = _mapping(raw.get("output") or {}, "output")
    _only(output, ("scores", "report"), "output")
    return RunConfig(
        input=_parse_input(raw["input"]),
        pipeline=pipeline,
        seed=seed,
        shuffle=_typed(raw.get("shuffle", False), BOOL, "shuffle"),
        metric_window=window,
        scores_path=None if output.get("scores") is None else _typed(output["scores"], STR, "output.scores"),
        report_path=None if output.get("report") is None else _typed(output["report"], STR, "output.report"),
    )


def load_config(path) -> RunConfig:
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as err:
            raise ConfigError(str(path), f"invalid YAML: {err}") from None
    return parse_config(raw if raw is not None else {})


# --------------------------------------------------------------------------
# construction


def build_source(spec: InputSpec, seed: int) -> StreamSource:
    if spec.kind == "synthetic":
        return generate_synthetic(spec.n, spec.m, spec.rate, seed)
    return read_csv_stream(spec.path, label_column=spec.label_column, has_header=spec.header)


def build_detector(component: Component, seed: int):
    cls = DETECTORS[component.name][0]
    return cls(seed=seed, **component.params)


def build_pipeline(spec: PipelineSpec, m: int, seed: int) -> Pipeline:
    """Instantiate the pipeline for ``m`` input features.

    Seeds: projector ``seed + 1``, detector ``i`` gets ``seed + 2 + i``.
    """
    projector = None
    if spec.projector is not None:
        projector = make_projector(m, spec.projector["d"], spec.projector["kind"], seed + 1)
    try:
        detectors = [build_detector(c, seed + 2 + i) for i, c in enumerate(spec.detectors)]
        posts = [POSTPROCESSORS[c.name][0](**c.params) for c in spec.postprocessors]
        cal = None
        if spec.calibrator is not None:
            cal = CALIBRATORS[spec.calibrator.name][0](**spec.calibrator.params)
    except BadParameter as err:
        raise ConfigError("pipeline", str(err)) from None
    return Pipeline(
        detectors,
        preprocessor=None if spec.preprocessor is None else PREPROCESSORS[spec.preprocessor](),
        projector=projector,
        ensembler=None if spec.ensemble is None else Ensembler(spec.ensemble),
        postprocessors=posts,
        calibrator=cal,
    )


def build_metric(config: RunConfig) -> AUROCMetric:
    return AUROCMetric(window=config.metric_window)
