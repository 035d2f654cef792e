"""Experiment pipeline: parse, clean, sample, prune, split, evaluate, report.

Experiment configs are flat ``key = value`` text files (``#`` starts a
comment). Recognized keys:

    dataset          path of the tag-assignment dump
    columns          column order, default ``user,resource,tag,timestamp``
    delimiter        ``tab``, ``comma``, ``whitespace`` (default) or a character
    header           true/false, default false
    blacklist        extra comma-separated tags to drop (defaults always apply)
    core             p-core level, 0 = no pruning (default 0)
    sample           fraction of users to keep, default 1
    seed             seed for all randomness, default 0
    algorithms       comma-separated names, see ``ALGORITHMS``
    cutoffs          highest k of the P/R/F1 curves, 1..10 (default 10)
    output           output directory, default ``results``
    workers          threads used for scoring, default 1
    include_single   hold out single-post users too, default false
    timings          also write timings.txt (not reproducible), default false

Algorithm parameters are plain keys (``d``, ``beta``, ``lambda``,
``min_recency``, ``neighbors``, ``damping``, ``tol``, ``max_iter``,
``mix``) and may be scoped to one algorithm as ``<algorithm>.<key>``.
"""

from __future__ import annotations

import logging
import platform
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
import scipy

from . import __version__
from .corpus import (
    DEFAULT_BLACKLIST,
    ColumnFormat,
    DatasetError,
    Folksonomy,
    TrainingIndex,
    build_index,
    p_core,
    parse_dataset,
    preprocess,
    sample_users,
)
from .evaluation import (
    AlgorithmReport,
    EvaluationError,
    SplitPair,
    evaluate,
    leave_one_out_split,
    metrics_csv,
    recall_precision_csv,
    table_csv,
)
from .frequency import DEFAULT_NEIGHBORS, cf, mp, mp_r, mp_u, mp_ur, prepare_cf
from .graph import DAMPING, MAX_ITER, TOL, apr_recommend, build_graph, fr_recommend
from .temporal import (
    DecayParams,
    bll_c_recommend,
    bll_recommend,
    girp_recommend,
    girptm_recommend,
)

_log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Bad configuration or unknown algorithm."""


# --------------------------------------------------------------------------
# algorithm registry

PARAM_DEFAULTS: dict[str, float] = {
    "d": 0.5,
    "beta": 0.5,
    "lambda": 1 / 86400,
    "min_recency": 1.0,
    "neighbors": DEFAULT_NEIGHBORS,
    "damping": DAMPING,
    "tol": TOL,
    "max_iter": MAX_ITER,
    "mix": 0.5,
}


def _decay(p: Mapping[str, float]) -> DecayParams:
    return DecayParams(d=p["d"], min_recency=p["min_recency"], beta=p["beta"], lam=p["lambda"])


def _bind_graph(index: TrainingIndex, p: Mapping[str, float], fn):
    if index.folksonomy.posts:
        build_graph(index).baseline(p["damping"], p["tol"], int(p["max_iter"]))
    return lambda u, r, t, k: fn(index, u, r, k, p["damping"], p["tol"], int(p["max_iter"]))


def _bind_cf(index: TrainingIndex, p: Mapping[str, float]):
    prepare_cf(index)
    n = int(p["neighbors"])
    return lambda u, r, t, k: cf(index, u, r, k, n)


# name -> (index, params) -> recommender(user, resource, ref_time, k)
ALGORITHMS: dict[str, Callable] = {
    "mp": lambda idx, p: (lambda u, r, t, k: mp(idx, k)),
    "mp_u": lambda idx, p: (lambda u, r, t, k: mp_u(idx, u, k)),
    "mp_r": lambda idx, p: (lambda u, r, t, k: mp_r(idx, r, k)),
    "mp_ur": lambda idx, p: (lambda u, r, t, k: mp_ur(idx, u, r, k, p["mix"])),
    "cf": _bind_cf,
    "apr": lambda idx, p: _bind_graph(idx, p, apr_recommend),
    "fr": lambda idx, p: _bind_graph(idx, p, fr_recommend),
    "bll": lambda idx, p: (lambda u, r, t, k, dp=_decay(p): bll_recommend(idx, u, t, k, dp)),
    "bll_c": lambda idx, p: (lambda u, r, t, k, dp=_decay(p): bll_c_recommend(idx, u, r, t, k, dp)),
    "girp": lambda idx, p: (lambda u, r, t, k, dp=_decay(p): girp_recommend(idx, u, t, k, dp)),
    "girptm": lambda idx, p: (lambda u, r, t, k, dp=_decay(p): girptm_recommend(idx, u, r, t, k, dp)),
}


def make_recommender(name: str, index: TrainingIndex, params: Mapping[str, float] | None = None):
    """Bind algorithm ``name`` to ``index``; precomputation happens here."""
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}")
    merged = dict(PARAM_DEFAULTS)
    merged.update(params or {})
    return ALGORITHMS[name](index, merged)


# --------------------------------------------------------------------------
# configuration


def parse_kv(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip().lower().replace("-", "_")
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def format_kv(items: Mapping[str, object]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in items.items())


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


def _delimiter(v: str) -> str | None:
    named = {"tab": "\t", "comma": ",", "whitespace": None, "": None, "semicolon": ";"}
    if v.lower() in named:
        return named[v.lower()]
    if v == "\\t":
        return "\t"
    if len(v) != 1:
        raise ConfigError(f"bad delimiter {v!r}")
    return v


def _csv_list(v: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in v.split(",") if x.strip())


@dataclass
class ExperimentConfig:
    dataset: str = ""
    columns: str = "user,resource,tag,timestamp"
    delimiter: str = "whitespace"
    header: bool = False
    blacklist: tuple[str, ...] = ()
    core: int = 0
    sample: float = 1.0
    seed: int = 0
    algorithms: tuple[str, ...] = ("mp", "mp_u", "mp_r", "mp_ur", "cf", "apr", "fr", "girp", "girptm", "bll", "bll_c")
    cutoffs: int = 10
    output: str = "results"
    workers: int = 1
    include_single: bool = False
    timings: bool = False
    params: dict[str, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithm {', '.join(unknown)}")
        if not self.algorithms:
            raise ConfigError("no algorithms configured")
        if self.core < 0:
            raise ConfigError("core must be >= 0")
        if not 0 < self.sample <= 1:
            raise ConfigError("sample must be in (0, 1]")
        if not 1 <= self.cutoffs <= 10:
            raise ConfigError("cutoffs must be in 1..10")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for scope, values in self.params.items():
            if scope and scope not in ALGORITHMS:
                raise ConfigError(f"parameters for unknown algorithm {scope!r}")
            for key in values:
                if key not in PARAM_DEFAULTS:
                    raise ConfigError(f"unknown parameter {key!r}")

    @classmethod
    def from_mapping(cls, kv: Mapping[str, str]) -> "ExperimentConfig":
        conv: dict[str, Callable[[str], object]] = {
            "dataset": str,
            "columns": str,
            "delimiter": str,
            "header": _bool,
            "blacklist": _csv_list,
            "core": int,
            "sample": float,
            "seed": int,
            "algorithms": _csv_list,
            "cutoffs": int,
            "output": str,
            "workers": int,
            "include_single": _bool,
            "timings": _bool,
        }
        kwargs: dict[str, object] = {}
        params: dict[str, dict[str, float]] = {}
        for key, value in kv.items():
            scope, _, name = key.rpartition(".")
            if not scope and key in conv:
                try:
                    kwargs[key] = conv[key](value)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {key}: {exc}") from None
            elif name in PARAM_DEFAULTS:
                try:
                    params.setdefault(scope, {})[name] = float(value)
                except ValueError:
                    raise ConfigError(f"bad value for {key}: {value!r}") from None
            else:
                raise ConfigError(f"unknown config key {key!r}")
        return cls(**kwargs, params=params)

    @classmethod
    def load(cls, path: str | Path, overrides: Mapping[str, str] | None = None) -> "ExperimentConfig":
        kv = parse_kv(Path(path).read_text(encoding="utf-8"))
        kv.update(overrides or {})
        return cls.from_mapping(kv)

    def algorithm_params(self, name: str) -> dict[str, float]:
        merged = dict(PARAM_DEFAULTS)
        merged.update(self.params.get("", {}))
        merged.update(self.params.get(name, {}))
        return merged

    def column_format(self) -> ColumnFormat:
        try:
            return ColumnFormat.from_order(self.columns, _delimiter(self.delimiter), self.header)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_mapping(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for f in fields(self):
            if f.name == "params":
                continue
            v = getattr(self, f.name)
            out[f.name] = ",".join(v) if isinstance(v, tuple) else str(v).lower() if isinstance(v, bool) else str(v)
        for scope in sorted(self.params):
            for key in sorted(self.params[scope]):
                out[f"{scope}.{key}" if scope else key] = repr(self.params[scope][key])
        return out


# --------------------------------------------------------------------------
# pipeline


STATS_COLUMNS = ("B", "U", "R", "T", "TAS")


def emit_stats(folk: Folksonomy) -> dict[str, int]:
    """|B|, |U|, |R|, |T| and |TAS| of ``folk``."""
    return folk.stats()


def stats_csv(rows: list[tuple[str, str, Mapping[str, int]]]) -> str:
    lines = ["dataset,core," + ",".join(STATS_COLUMNS)]
    for name, core, st in rows:
        lines.append(",".join([name, core] + [str(st[c]) for c in STATS_COLUMNS]))
    return "\n".join(lines) + "\n"


@dataclass
class Prepared:
    raw: Folksonomy
    cleaned: Folksonomy
    pruned: Folksonomy


def prepare(config: ExperimentConfig) -> Prepared:
    """parse -> preprocess -> sample -> p-core."""
    path = Path(config.dataset)
    if not path.is_file():
        raise DatasetError(f"cannot read dataset {config.dataset!r}")
    with path.open(encoding="utf-8", newline="") as fh:
        raw = parse_dataset(fh, config.column_format())
    cleaned = preprocess(raw, DEFAULT_BLACKLIST | set(config.blacklist))
    if config.sample < 1:
        cleaned = sample_users(cleaned, config.sample, config.seed)
    pruned = p_core(cleaned, config.core) if config.core > 1 else cleaned
    return Prepared(raw, cleaned, pruned)


@dataclass
class ExperimentResult:
    stats: list[tuple[str, str, dict[str, int]]]
    split: SplitPair
    reports: list[AlgorithmReport]
    files: dict[str, str]


def run_experiment(config: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """Run the full pipeline and write the result files to ``config.output``.

    Files: stats.csv, metrics.csv, table.csv, recall_precision.csv and
    manifest.txt, all byte-reproducible from (config, dataset). With
    ``timings`` set, wall-clock times go to a separate timings.txt.
    """
    config.validate()
    prep = prepare(config)
    name = Path(config.dataset).stem
    stats = [(name, "-", emit_stats(prep.cleaned))]
    if config.core > 1:
        stats.append((name, str(config.core), emit_stats(prep.pruned)))

    split = leave_one_out_split(prep.pruned, include_single=config.include_single)
    if not split.test:
        raise EvaluationError("empty test set after splitting")
    index = build_index(split.train)
    _log.info("train %s, %d test posts", index, len(split.test))

    reports = []
    cutoffs = range(1, config.cutoffs + 1)
    for algo in config.algorithms:
        start = time.perf_counter()
        rec = make_recommender(algo, index, config.algorithm_params(algo))
        rep = evaluate(rec, split, cutoffs, workers=config.workers, name=algo)
        rep.wall_time = time.perf_counter() - start
        _log.info("%s: %s (%.1fs)", algo, rep.summary(), rep.wall_time)
        reports.append(rep)

    manifest = {"folkrec": __version__, "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__}
    # execution-only settings do not change results and stay out, so that
    # reruns with a different output dir or thread count match byte for byte
    manifest.update({k: v for k, v in config.to_mapping().items() if k not in ("output", "workers", "timings")})
    manifest.update({"train_posts": len(split.train), "test_posts": len(split.test)})
    files = {
        "stats.csv": stats_csv(stats),
        "metrics.csv": metrics_csv(reports),
        "table.csv": table_csv(reports),
        "recall_precision.csv": recall_precision_csv(reports),
        "manifest.txt": format_kv(manifest),
    }
    if config.timings:
        files["timings.txt"] = format_kv({r.name: f"{r.wall_time:.3f}" for r in reports})
    if write:
        out = Path(config.output)
        out.mkdir(parents=True, exist_ok=True)
        for fname, content in files.items():
            (out / fname).write_text(content, encoding="utf-8", newline="\n")
    return ExperimentResult(stats, split, reports, files)
