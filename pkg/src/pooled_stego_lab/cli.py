# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Command-line entry point.

Exit codes: 0 on success, 1 on usage, configuration or score-file errors,
2 on other runtime errors (infeasible payloads, model mismatches).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .artifacts import (
    csv_text,
    json_text,
    read_json,
    write_csv_atomic,
    write_files_atomic,
    write_json_atomic,
)
from .config import ExperimentConfig, apply_overrides, load_config
from .constants import ALLOCATION_CSV_HEADER, BAG_CSV_HEADER, REPORT_CSV_HEADER
from .cover_source import gen_bags
from .errors import (
    ConfigError,
    ConfigFileError,
    ConfigMismatchError,
    LabError,
    ScoreFileError,
    TrainingError,
)
from .harness import (
    Dataset,
    TrainedPoolers,
    build_dataset,
    evaluate,
    run_experiment,
    train_poolers,
)
from .pooling import (
    fit_parzen_config,
    model_from_dict,
    model_to_dict,
    parzen_histograms,
)
from .report import render_tables, report_from_dict, table_rows
from .sid import Label, ScoredBag, load_scores, write_scores
from .spreading import (
    Strategy,
    StrategyId,
    allocation_rows,
    spread,
    total_bits_for,
)

logger = logging.getLogger(__name__)

_DEFAULTS = ExperimentConfig()


class UsageError(Exception):
    """Raised instead of exiting when the command line cannot be parsed"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(f"{self.prog}: {message}")


def _common_flags() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--config",
        type=Path,
        help="experiment JSON config (default: built-in defaults)",
    )
    common.add_argument(
        "--output-dir",
        type=Path,
        default=Path("."),
        help="where artifacts are written (default: .)",
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key, e.g. cover_params.n_coeffs=1000 (repeatable)",
    )
    common.add_argument(
        "--seed",
        type=int,
        help=f"master seed (default: {_DEFAULTS.master_seed})",
    )
    common.add_argument(
        "--workers",
        type=int,
        help="worker processes; results do not depend on it "
        f"(default: {_DEFAULTS.workers})",
    )
    common.add_argument(
        "-v", "--verbose", action="store_true", help="log debug messages"
    )
    common.add_argument(
        "-q", "--quiet", action="store_true", help="log warnings and errors only"
    )
    return common


def _bag_flags(parser: argparse.ArgumentParser, with_strategy: bool = False) -> None:
    parser.add_argument(
        "--bags", type=int, default=1, help="number of bags (default: 1)"
    )
    parser.add_argument("--b", type=int, default=2, help="images per bag (default: 2)")
    if not with_strategy:
        return
    parser.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        default="linear",
        help="spreading strategy (default: linear)",
    )
    parser.add_argument(
        "--bptc",
        type=float,
        help=f"bag payload in bits per total coefficient (default: {_DEFAULTS.bptc})",
    )
    parser.add_argument(
        "--beta",
        type=float,
        help=f"carrier fraction of usesbeta (default: {_DEFAULTS.beta})",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pooled-stego-lab",
        description="Batch steganography and pooled steganalysis lab",
    )
    sub = parser.add_subparsers(
        dest="command", metavar="subcommand", parser_class=_Parser
    )
    sub.required = True
    common = _common_flags()

    p = sub.add_parser(
        "gen-bags", parents=[common], help="generate synthetic cover bags"
    )
    _bag_flags(p)

    p = sub.add_parser(
        "spread", parents=[common], help="spread a payload over cover bags"
    )
    _bag_flags(p, with_strategy=True)

    p = sub.add_parser(
        "score", parents=[common], help="write SID scores of one cover/stego dataset"
    )
    b0 = _DEFAULTS.bag_sizes[0]
    p.add_argument("--b", type=int, default=b0, help=f"images per bag (default: {b0})")
    p.add_argument(
        "--split",
        choices=["train", "test"],
        default="train",
        help="dataset split (default: train)",
    )
    p.add_argument("--run", type=int, default=0, help="run index (default: 0)")

    p = sub.add_parser(
        "featurize", parents=[common], help="Parzen histograms of a score file"
    )
    p.add_argument("--scores", type=Path, required=True, help="score CSV")

    p = sub.add_parser(
        "train", parents=[common], help="train all pooling functions on a score file"
    )
    p.add_argument("--scores", type=Path, required=True, help="training score CSV")

    p = sub.add_parser(
        "evaluate",
        parents=[common],
        help="test trained pooling functions on a score file",
    )
    p.add_argument("--scores", type=Path, required=True, help="test score CSV")
    p.add_argument(
        "--models", type=Path, required=True, help="directory written by train"
    )

    sub.add_parser(
        "run-all",
        parents=[common],
        help="run the full train/test protocol and write a report",
    )

    p = sub.add_parser(
        "report", parents=[common], help="render an existing report as tables"
    )
    p.add_argument(
        "--report", type=Path, required=True, help="report JSON written by run-all"
    )
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file, then --set overrides, then the dedicated flags"""
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"master_seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    for key in ("bptc", "beta"):
        if getattr(args, key, None) is not None:
            overrides.append(f"{key}={getattr(args, key)}")
    return apply_overrides(load_config(args.config), overrides)


def _cmd_gen_bags(args, config: ExperimentConfig) -> None:
    bags = gen_bags(config.master_seed, args.bags, args.b, config.cover_params)
    rows = [
        {
            "bag_id": bag.bag_id,
            "image_id": image.id,
            "n_coeffs": image.n_coeffs,
            "cost_mean": repr(float(image.costs.mean())),
            "variance_mean": repr(float(image.variances.mean())),
            "cost_offset": repr(image.cost_offset),
        }
        for bag in bags
        for image in bag.images
    ]
    write_csv_atomic(args.output_dir / "bags.csv", rows, BAG_CSV_HEADER)


def _cmd_spread(args, config: ExperimentConfig) -> None:
    strategy = StrategyId.parse(args.strategy, config.beta)
    rows = []
    for bag in gen_bags(config.master_seed, args.bags, args.b, config.cover_params):
        total = total_bits_for(bag, config.bptc)
        allocation = spread(bag, total, strategy, config.master_seed)
        rows.extend(allocation_rows(bag, allocation))
    write_csv_atomic(args.output_dir / "allocations.csv", rows, ALLOCATION_CSV_HEADER)


def _cmd_score(args, config: ExperimentConfig) -> None:
    dataset = build_dataset(config, args.b, args.run, args.split)
    write_scores(args.output_dir / f"scores_{args.split}.csv", dataset.bags)


def _dataset_from_file(path: Path, config: ExperimentConfig) -> Dataset:
    bags = load_scores(path, config.beta)
    sizes = {bag.b for bag in bags}
    if len(sizes) != 1:
        raise ConfigMismatchError(f"bag sizes in {path}", "one size", sorted(sizes))
    covers = [bag for bag in bags if bag.label is Label.COVER]
    stegos: Dict[str, List[ScoredBag]] = {}
    for bag in bags:
        if bag.label is Label.STEGO:
            stegos.setdefault(bag.strategy_name, []).append(bag)
    return Dataset(sizes.pop(), 0, "file", covers, stegos)


def _cmd_featurize(args, config: ExperimentConfig) -> None:
    bags = load_scores(args.scores, config.beta)
    if not bags:
        raise TrainingError(f"{args.scores} holds no bags")
    scores = [bag.scores for bag in bags]
    parzen = fit_parzen_config(np.concatenate(scores), config.p)
    H = parzen_histograms(scores, parzen)
    bins = [f"h_{j}" for j in range(parzen.p)]
    rows = [
        {
            "bag_id": bag.bag_id,
            "label": bag.label.value,
            "strategy": bag.strategy_name,
            **{name: repr(float(v)) for name, v in zip(bins, h)},
        }
        for bag, h in zip(bags, H)
    ]
    write_files_atomic(
        {
            args.output_dir / "parzen.json": json_text(parzen.to_dict()),
            args.output_dir / "histograms.csv": csv_text(
                rows, ["bag_id", "label", "strategy"] + bins
            ),
        }
    )


def _cmd_train(args, config: ExperimentConfig) -> None:
    train = _dataset_from_file(args.scores, config)
    present = tuple(s for s in config.strategies if s in train.stegos)
    if not present:
        raise TrainingError(
            f"{args.scores} holds no stego bags of {', '.join(config.strategies)}"
        )
    config = apply_overrides(config, [f"strategies={','.join(present)}"])
    poolers = train_poolers(train, config)

    out = args.output_dir
    domain = poolers.pool_domain
    files = {
        out / "model_disc.json": json_text(
            model_to_dict(poolers.disc, poolers.parzen, domain)
        )
    }
    for name, model in poolers.clair.items():
        files[out / f"model_clair_{name}.json"] = json_text(
            model_to_dict(model, poolers.parzen, domain)
        )
    files[out / "thresholds.json"] = json_text(
        {
            "bag_size": poolers.bag_size,
            "strategies": list(poolers.clair),
            "tau_mean": poolers.tau_mean,
            "tau_max": poolers.tau_max,
            "pool_domain": domain,
        }
    )
    write_files_atomic(files)


def _read_model(path: Path):
    return model_from_dict(read_json(path), str(path))


def _load_poolers(models: Path, config: ExperimentConfig) -> TrainedPoolers:
    meta_path = models / "thresholds.json"
    meta = read_json(meta_path)
    disc, parzen, domain = _read_model(models / "model_disc.json")
    if parzen.p != config.p:
        raise ConfigMismatchError("model p", config.p, parzen.p)
    try:
        names = [str(name) for name in meta["strategies"]]
        bag_size = int(meta["bag_size"])
        tau_mean, tau_max = float(meta["tau_mean"]), float(meta["tau_max"])
    except KeyError as e:
        raise ConfigFileError(meta_path, f"missing field '{e.args[0]}'") from e
    except (TypeError, ValueError) as e:
        raise ConfigFileError(meta_path, f"not a threshold file: {e}") from e
    clair = {}
    for name in names:
        path = models / f"model_clair_{name}.json"
        model, own_parzen, _ = _read_model(path)
        if own_parzen.p != parzen.p or not np.array_equal(
            own_parzen.centers, parzen.centers
        ):
            raise ConfigMismatchError(f"centers of {path.name}", parzen.p, own_parzen.p)
        clair[name] = model
    return TrainedPoolers(
        bag_size=bag_size,
        parzen=parzen,
        disc=disc,
        clair=clair,
        tau_mean=tau_mean,
        tau_max=tau_max,
        pool_domain=domain,
    )


def _cmd_evaluate(args, config: ExperimentConfig) -> None:
    poolers = _load_poolers(args.models, config)
    test = _dataset_from_file(args.scores, config)
    results = {
        name: evaluate(test, poolers, name, test.bag_size)
        for name in poolers.clair
        if test.stegos.get(name)
    }
    write_json_atomic(
        args.output_dir / "evaluation.json",
        {"bag_size": test.bag_size, "pe": results},
    )


def _cmd_run_all(args, config: ExperimentConfig) -> None:
    report = run_experiment(config)
    write_files_atomic(
        {
            args.output_dir / "report.json": json_text(report.to_dict()),
            args.output_dir / "report.csv": csv_text(
                table_rows(report), REPORT_CSV_HEADER
            ),
        }
    )


def _cmd_report(args, config: ExperimentConfig) -> None:
    report = report_from_dict(read_json(args.report), str(args.report))
    text = render_tables(report)
    files = {args.output_dir / "report.txt": text}
    sizes = sorted({c.bag_size for c in report.cells})
    for pooling in sorted({c.pooling for c in report.cells}):
        rows: Dict[str, Dict[str, str]] = {}
        for c in report.cells + report.averages:
            if c.pooling != pooling:
                continue
            row = rows.setdefault(c.strategy, {"strategy": c.strategy})
            row[f"b={c.bag_size}"] = repr(c.pe_mean)
        files[args.output_dir / f"report_{pooling}.csv"] = csv_text(
            list(rows.values()), ["strategy"] + [f"b={b}" for b in sizes]
        )
    write_files_atomic(files)
    sys.stdout.write(text)


_COMMANDS: Dict[str, Callable[[argparse.Namespace, ExperimentConfig], None]] = {
    "gen-bags": _cmd_gen_bags,
    "spread": _cmd_spread,
    "score": _cmd_score,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "run-all": _cmd_run_all,
    "report": _cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return 1
    except SystemExit as e:
        return int(e.code or 0)

    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )

    try:
        config = _resolve_config(args)
        _COMMANDS[args.command](args, config)
    except (ConfigError, ScoreFileError) as e:
        sys.stderr.write(f"{args.command}: {e}\n")
        return 1
    except LabError as e:
        sys.stderr.write(f"{args.command}: {e}\n")
        return 2
    return 0
