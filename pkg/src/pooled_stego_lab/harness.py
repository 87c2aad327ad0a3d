# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Experiment pipeline: build cover/stego bag datasets, train the four pooling
rules, and estimate P_e per (pooling, strategy, bag size), averaged over runs.

Every bag draws its covers and noise from seeds derived from
(master seed, run, split, bag size, pair index, strategy), so results do not
depend on worker count or evaluation order.
"""

from __future__ import annotations

import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import ExperimentConfig, config_to_dict
from .constants import (
    POOLINGS,
    REFERENCE_GAP_DISC_TO_CLAIR,
    REFERENCE_GAP_DISC_TO_MEAN_MAX,
    SPLITS,
    TAG_COVER_BAG,
    TAG_STEGO_BAG,
)
from .cover_source import gen_bag
from .errors import (
    ConfigMismatchError,
    InfeasibleAllocationError,
    ParameterError,
    SkipBudgetExceededError,
    TrainingError,
)
from .pooling import (
    LinearModel,
    ParzenConfig,
    error_rate,
    fit_parzen_config,
    optimize_threshold,
    parzen_histograms,
    pool_statistic,
    svm_margins,
    train_linear_svm,
)
from .report import Report, ReportCell
from .seeding import child_seed
from .sid import ScoredBag, score_bag, single_image_error
from .spreading import Strategy, spread, total_bits_for

logger = logging.getLogger(__name__)

# cover bag of pair i gets id i * BAG_ID_STRIDE, its stego twins follow
BAG_ID_STRIDE = 1 + len(Strategy)
_STRATEGY_CODES = {s.value: k for k, s in enumerate(Strategy)}

PROTOCOL_DEVIATION = (
    "every bag is drawn from fresh independent synthetic covers; covers are "
    "never reused across bags"
)


@dataclass(frozen=True, eq=False)
class Dataset:
    bag_size: int
    run_idx: int
    split: str
    covers: List[ScoredBag]
    stegos: Dict[str, List[ScoredBag]]
    skipped: Dict[str, int] = field(default_factory=dict)

    @property
    def bags(self) -> List[ScoredBag]:
        return self.covers + [bag for bags in self.stegos.values() for bag in bags]

    @property
    def all_stegos(self) -> List[ScoredBag]:
        return [bag for bags in self.stegos.values() for bag in bags]


@dataclass(frozen=True, eq=False)
class TrainedPoolers:
    bag_size: int
    parzen: ParzenConfig
    disc: LinearModel
    clair: Dict[str, LinearModel]
    tau_mean: float
    tau_max: float
    pool_domain: str = "scores"


def pair_index(bag: ScoredBag) -> int:
    return bag.bag_id // BAG_ID_STRIDE


def _split_code(split: str) -> int:
    if split not in SPLITS:
        raise ParameterError("split", split, f"expected one of {SPLITS}")
    return SPLITS.index(split)


def _build_pair(
    config: ExperimentConfig, bag_size: int, run_idx: int, split_code: int, index: int
) -> Tuple[ScoredBag, Dict[str, Optional[ScoredBag]]]:
    """The cover bag of pair ``index`` and one stego bag per enabled strategy"""
    master = config.master_seed
    seed = child_seed(TAG_COVER_BAG, master, run_idx, split_code, bag_size, index)
    bag = gen_bag(seed, index * BAG_ID_STRIDE, bag_size, config.cover_params)
    cover = score_bag(seed, bag, None, config.sid_params)

    stegos: Dict[str, Optional[ScoredBag]] = {}
    for strategy in config.strategy_ids:
        code = _STRATEGY_CODES[strategy.name]
        seed = child_seed(
            TAG_STEGO_BAG, master, run_idx, split_code, bag_size, index, code
        )
        bag_id = index * BAG_ID_STRIDE + 1 + code
        bag = gen_bag(seed, bag_id, bag_size, config.cover_params)
        try:
            allocation = spread(bag, total_bits_for(bag, config.bptc), strategy, seed)
        except InfeasibleAllocationError as e:
            logger.debug("skipping bag %d: %s", bag.bag_id, e)
            stegos[strategy.name] = None
            continue
        stegos[strategy.name] = score_bag(seed, bag, allocation, config.sid_params)
    return cover, stegos


def build_dataset(
    config: ExperimentConfig,
    bag_size: int,
    run_idx: int,
    split: str,
    executor: Optional[Executor] = None,
) -> Dataset:
    """
    n pairs (n_train_pairs or n_test_pairs): each pair is one cover bag plus
    one stego bag per enabled strategy, each from its own covers. Stego bags
    that their strategy cannot fill are skipped and counted.
    """
    code = _split_code(split)
    n = config.n_train_pairs if split == "train" else config.n_test_pairs
    args = [(config, bag_size, run_idx, code, i) for i in range(n)]
    if executor is None:
        pairs = [_build_pair(*a) for a in args]
    else:
        pairs = list(executor.map(_build_pair, *zip(*args), chunksize=max(1, n // 64)))

    covers = [cover for cover, _ in pairs]
    stegos: Dict[str, List[ScoredBag]] = {s: [] for s in config.strategies}
    skipped: Dict[str, int] = {s: 0 for s in config.strategies}
    for _, twins in pairs:
        for name, bag in twins.items():
            if bag is None:
                skipped[name] += 1
            else:
                stegos[name].append(bag)

    n_skipped = sum(skipped.values())
    n_stego = n * len(config.strategies)
    if n_skipped > config.max_skip_fraction * n_stego:
        raise SkipBudgetExceededError(n_skipped, n_stego, config.max_skip_fraction)
    if n_skipped:
        logger.warning("%s b=%d run %d: skipped %s", split, bag_size, run_idx, skipped)
    logger.info(
        "%s set b=%d run %d: %d cover bags, %d stego bags",
        split,
        bag_size,
        run_idx,
        len(covers),
        n_stego - n_skipped,
    )
    return Dataset(bag_size, run_idx, split, covers, stegos, skipped)


def _scores(bags: List[ScoredBag]) -> List[np.ndarray]:
    return [bag.scores for bag in bags]


def _statistics(bags: List[ScoredBag], kind: str, view) -> np.ndarray:
    domain, parzen = view
    return np.array([pool_statistic(bag.scores, kind, domain, parzen) for bag in bags])


def _train_svm(
    config: ExperimentConfig,
    parzen: ParzenConfig,
    covers,
    stegos,
    cover_weight: float = 1.0,
) -> LinearModel:
    H = parzen_histograms(_scores(covers) + _scores(stegos), parzen)
    y = np.concatenate([-np.ones(len(covers)), np.ones(len(stegos))])
    weights = np.where(y < 0, float(cover_weight), 1.0)
    model = train_linear_svm(
        H,
        y,
        C=config.svm_C,
        tol=config.svm_tol,
        max_iter=config.svm_max_iter,
        weights=weights,
    )
    if config.calibrate_delta:
        margins = svm_margins(model, H)
        tau, _ = optimize_threshold(margins[y < 0], margins[y > 0])
        if np.isfinite(tau):
            model = model.with_delta(tau)
    return model


def discriminative_set(
    dataset: Dataset, strategies: List[str]
) -> Tuple[List[ScoredBag], List[ScoredBag], int]:
    """
    The discriminative training set is the union of the clairvoyant sets:
    the stego bags of every strategy against one copy of the covers per
    strategy. Returns the covers once, the stegos and the copy count, which
    the trainer applies as a cover weight so that both classes weigh the same.
    """
    stegos: List[ScoredBag] = []
    copies = 0
    for name in strategies:
        mine = dataset.stegos.get(name, [])
        if mine:
            stegos.extend(mine)
            copies += 1
    return list(dataset.covers), stegos, copies


def train_poolers(train: Dataset, config: ExperimentConfig) -> TrainedPoolers:
    if not train.covers:
        raise TrainingError("no cover bags in the training set")
    for name in config.strategies:
        if not train.stegos.get(name):
            raise TrainingError(f"no '{name}' stego bags in the training set")

    parzen = fit_parzen_config(np.concatenate(_scores(train.bags)), config.p)
    covers, stegos, copies = discriminative_set(train, list(config.strategies))
    if not stegos:
        raise TrainingError("no stego bags for the discriminative set")
    disc = _train_svm(config, parzen, covers, stegos, cover_weight=copies)
    clair = {
        name: _train_svm(config, parzen, train.covers, train.stegos[name])
        for name in config.strategies
    }

    view = (config.pool_domain, parzen)
    taus = {}
    for kind in ("mean", "max"):
        neg = _statistics(train.covers, kind, view)
        pos = _statistics(train.all_stegos, kind, view)
        taus[kind], pe = optimize_threshold(neg, pos)
        logger.debug("tau_%s = %.6g, train P_e %.4f", kind, taus[kind], pe)
    return TrainedPoolers(
        bag_size=train.bag_size,
        parzen=parzen,
        disc=disc,
        clair=clair,
        tau_mean=taus["mean"],
        tau_max=taus["max"],
        pool_domain=config.pool_domain,
    )


def evaluate(
    test: Dataset, poolers: TrainedPoolers, strategy: str, bag_size: int
) -> Dict[str, float]:
    """Test P_e of each pooling rule on covers vs stegos of ``strategy``"""
    if poolers.bag_size != bag_size or test.bag_size != bag_size:
        raise ConfigMismatchError(
            "bag size", bag_size, (poolers.bag_size, test.bag_size)
        )
    for name, model in [("disc", poolers.disc)] + list(poolers.clair.items()):
        if model.p != poolers.parzen.p:
            raise ConfigMismatchError(f"p of model {name}", poolers.parzen.p, model.p)
    if strategy not in poolers.clair:
        raise ConfigMismatchError(
            "clairvoyant strategy", sorted(poolers.clair), strategy
        )
    stegos = test.stegos.get(strategy, [])
    if not test.covers or not stegos:
        raise ParameterError("test", strategy, "need cover and stego bags to evaluate")

    H_cover = parzen_histograms(_scores(test.covers), poolers.parzen)
    H_stego = parzen_histograms(_scores(stegos), poolers.parzen)
    result = {}
    for pooling, model in (("disc", poolers.disc), ("clair", poolers.clair[strategy])):
        result[pooling] = error_rate(
            svm_margins(model, H_cover), svm_margins(model, H_stego), model.delta
        )
    view = (poolers.pool_domain, poolers.parzen)
    for kind, tau in (("mean", poolers.tau_mean), ("max", poolers.tau_max)):
        result[kind] = error_rate(
            _statistics(test.covers, kind, view), _statistics(stegos, kind, view), tau
        )
    return result


def run_cell(
    config: ExperimentConfig, run_idx: int, bag_size: int
) -> Tuple[Dict[Tuple[str, str], float], Dict[str, int]]:
    """Train and test one (run, bag size) cell of the experiment grid"""
    train = build_dataset(config, bag_size, run_idx, "train")
    test = build_dataset(config, bag_size, run_idx, "test")
    poolers = train_poolers(train, config)
    pes = {}
    for strategy in config.strategies:
        for pooling, pe in evaluate(test, poolers, strategy, bag_size).items():
            pes[(pooling, strategy)] = pe
    skipped = {
        s: train.skipped.get(s, 0) + test.skipped.get(s, 0) for s in config.strategies
    }
    logger.info("run %d, b=%d done", run_idx, bag_size)
    return pes, skipped


def _run_cell_args(args) -> Tuple[Dict[Tuple[str, str], float], Dict[str, int]]:
    return run_cell(*args)


def run_experiment(config: ExperimentConfig) -> Report:
    """
    Run every (run, bag size) cell and aggregate P_e over runs. Cells are
    independent, so ``config.workers`` > 1 spreads them over processes
    without changing any number in the report.
    """
    config.validate()
    tasks = [(config, r, b) for r in range(config.runs) for b in config.bag_sizes]
    logger.info("running %d cells with %d workers", len(tasks), config.workers)
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_cell_args, tasks))
    else:
        results = [_run_cell_args(t) for t in tasks]

    per_cell: Dict[Tuple[str, str, int], List[float]] = {}
    skipped: Dict[str, int] = {}
    for (_, run_idx, b), (pes, skips) in zip(tasks, results):
        for (pooling, strategy), pe in pes.items():
            per_cell.setdefault((pooling, strategy, b), []).append(pe)
        for strategy, count in skips.items():
            key = f"{strategy}@b={b}"
            skipped[key] = skipped.get(key, 0) + count

    cells = []
    for pooling in POOLINGS:
        for strategy in config.strategies:
            for b in config.bag_sizes:
                runs = per_cell[(pooling, strategy, b)]
                cells.append(
                    ReportCell(
                        pooling=pooling,
                        strategy=strategy,
                        bag_size=b,
                        pe_mean=float(np.mean(runs)),
                        pe_var=float(np.var(runs)),
                        pe_runs=tuple(runs),
                    )
                )
    metadata = {
        "protocol_deviation": PROTOCOL_DEVIATION,
        "reference_gaps": {
            "disc_below_mean_max": REFERENCE_GAP_DISC_TO_MEAN_MAX,
            "disc_above_clair": REFERENCE_GAP_DISC_TO_CLAIR,
        },
        "skipped": skipped,
        "sid_single_image_pe": single_image_error(
            config.sid_params, config.bptc, seed=config.master_seed
        ),
    }
    echo = config_to_dict(config)
    echo.pop("workers")
    return Report(echo, cells, metadata)
