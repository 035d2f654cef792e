"""Command line entry point: ``folkrec {prepare,stats,split,evaluate,synth}``.

Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .corpus import DatasetError, SnapshotError, write_dataset
from .evaluation import EvaluationError, leave_one_out_split
from .harness import ConfigError, ExperimentConfig, emit_stats, parse_kv, prepare, run_experiment, stats_csv
from .synthetic import generate_synthetic

EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value experiment config; flags override it")
    p.add_argument("dataset", nargs="?", help="tag-assignment dump")
    p.add_argument("--columns", help="column order, e.g. user,resource,tag,timestamp")
    p.add_argument("--delimiter", help="tab, comma, whitespace or a single character")
    p.add_argument("--header", action="store_true", default=None, help="skip the first line")
    p.add_argument("--blacklist", help="extra comma-separated tags to drop")
    p.add_argument("--core", type=int, help="p-core level (0 = none)")
    p.add_argument("--sample-users", type=float, dest="sample", metavar="FRACTION")
    p.add_argument("--seed", type=int)


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithms", help="comma-separated algorithm names")
    p.add_argument("--output", "-o", help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--cutoffs", type=int, help="highest k (1..10)")
    p.add_argument("--include-single", action="store_true", default=None)
    p.add_argument("--timings", action="store_true", default=None, help="write timings.txt")
    p.add_argument("--d", type=float, help="BLL decay exponent")
    p.add_argument("--beta", type=float, help="user weight in BLL+C / GIRPTM")
    p.add_argument("--lambda", type=float, dest="lambda_", help="GIRP decay rate per second")
    p.add_argument("--min-recency", type=float)
    p.add_argument("--mix", type=float, help="user weight in MP_u,r")
    p.add_argument("--neighbors", type=int, help="CF neighborhood size")
    p.add_argument("--damping", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)


_FLAG_KEYS = {
    "dataset": "dataset",
    "columns": "columns",
    "delimiter": "delimiter",
    "header": "header",
    "blacklist": "blacklist",
    "core": "core",
    "sample": "sample",
    "seed": "seed",
    "algorithms": "algorithms",
    "output": "output",
    "workers": "workers",
    "cutoffs": "cutoffs",
    "include_single": "include_single",
    "timings": "timings",
    "d": "d",
    "beta": "beta",
    "lambda_": "lambda",
    "min_recency": "min_recency",
    "mix": "mix",
    "neighbors": "neighbors",
    "damping": "damping",
    "tol": "tol",
    "max_iter": "max_iter",
}


def _config(args: argparse.Namespace) -> ExperimentConfig:
    kv = parse_kv(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    for attr, key in _FLAG_KEYS.items():
        value = getattr(args, attr, None)
        if value is not None:
            kv[key] = str(value)
    if not kv.get("dataset"):
        raise ConfigError("no dataset given")
    return ExperimentConfig.from_mapping(kv)


def cmd_prepare(args) -> int:
    config = _config(args)
    prep = prepare(config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        write_dataset(prep.pruned, fh)
    sys.stdout.write(_stats_text(config, prep))
    return 0


def _stats_text(config: ExperimentConfig, prep) -> str:
    name = Path(config.dataset).stem
    rows = [(name, "-", emit_stats(prep.cleaned))]
    if config.core > 1:
        rows.append((name, str(config.core), emit_stats(prep.pruned)))
    return stats_csv(rows)


def cmd_stats(args) -> int:
    config = _config(args)
    sys.stdout.write(_stats_text(config, prepare(config)))
    return 0


def cmd_split(args) -> int:
    config = _config(args)
    split = leave_one_out_split(prepare(config).pruned, include_single=config.include_single)
    for path in (args.train, args.test):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(args.train, "w", encoding="utf-8", newline="\n") as fh:
        write_dataset(split.train, fh)
    with open(args.test, "w", encoding="utf-8", newline="\n") as fh:
        for case in split.test:
            for tag in sorted(case.true_tags):
                fh.write(f"{case.user}\t{case.resource}\t{tag}\t{case.timestamp}\n")
    print(f"train posts: {len(split.train)}, test posts: {len(split.test)}")
    return 0


def cmd_evaluate(args) -> int:
    result = run_experiment(_config(args))
    sys.stdout.write(result.files["table.csv"])
    return 0


def cmd_synth(args) -> int:
    folk = generate_synthetic(
        args.users,
        args.base_tags,
        args.reuse_bias,
        args.recency_bias,
        args.seed,
        posts_per_user=(args.min_posts, args.max_posts),
        resources=args.resources,
        resource_bias=args.resource_bias,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        write_dataset(folk, fh)
    sys.stdout.write(stats_csv([(out.stem, "-", folk.stats())]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="folkrec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prepare", help="clean and prune a dump, write it as TSV")
    _add_input(p)
    p.add_argument("--out", required=True, help="cleaned TSV to write")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("stats", help="dataset statistics before and after pruning")
    _add_input(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="write the leave-one-out train/test files")
    _add_input(p)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--include-single", action="store_true", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="run an experiment and write the reports")
    _add_input(p)
    _add_params(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic folksonomy")
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--users", type=int, default=500)
    p.add_argument("--base-tags", type=int, default=3, help="max tags per post")
    p.add_argument("--reuse-bias", type=float, default=0.9)
    p.add_argument("--recency-bias", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-posts", type=int, default=10)
    p.add_argument("--max-posts", type=int, default=40)
    p.add_argument("--resources", type=int, default=0, help="shared resource pool (0 = narrow)")
    p.add_argument("--resource-bias", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"folkrec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # bad synth arguments and the like are usage problems; data
        # problems carry their own exception types
        if isinstance(exc, (DatasetError, EvaluationError, SnapshotError)):
            print(f"folkrec: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"folkrec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"folkrec: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
