# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Single-Image Detector stand-in.

A quantitative detector estimates the embedding rate of one image. Its error
is modelled as a fixed per-image offset (content the regressor misreads the
same way whatever the payload) plus fresh estimation noise, and the output
saturates at a cap.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .artifacts import write_csv_atomic
from .constants import (
    LABELS,
    SCORE_CSV_HEADER,
    TAG_SCORE,
    TAG_SID_BETWEEN,
    TAG_SID_WITHIN,
)
from .cover_source import Bag, ImageModel
from .errors import ParameterError, ScoreFileError
from .pooling import optimize_threshold
from .seeding import child_seed, rng_for
from .spreading import Allocation, StrategyId

logger = logging.getLogger(__name__)


class Label(str, Enum):
    COVER = "cover"
    STEGO = "stego"


@dataclass(frozen=True)
class SidParams:
    gain: float = 1.0
    bias: float = 0.0
    sigma_between: float = 0.05
    sigma_within: float = 0.02
    saturation: float = 2.0

    def validate(self) -> None:
        for name in ("gain", "bias"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(name, getattr(self, name), "must be finite")
        for name in ("sigma_between", "sigma_within"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(name, value, "must be >= 0")
        if not self.saturation > 0:
            raise ParameterError("saturation", self.saturation, "must be > 0")


@dataclass(frozen=True, eq=False)
class ScoredBag:
    bag_id: int
    scores: np.ndarray
    label: Label
    strategy: Optional[StrategyId] = None
    true_rates: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        label = Label(self.label)
        scores = np.asarray(self.scores, dtype=np.float64)
        rates = np.asarray(self.true_rates, dtype=np.float64)
        if rates.size == 0 and label is Label.COVER:
            rates = np.zeros_like(scores)
        if scores.ndim != 1 or scores.size < 1 or rates.shape != scores.shape:
            raise ParameterError(
                "scores", scores.shape, f"must be a non-empty vector like {rates.shape}"
            )
        if label is Label.COVER and np.any(rates != 0):
            raise ParameterError(
                "true_rates", rates.max(), "cover bags carry no payload"
            )
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "true_rates", rates)

    @property
    def b(self) -> int:
        return int(self.scores.size)

    @property
    def strategy_name(self) -> str:
        return "none" if self.strategy is None else self.strategy.name


def image_offset(image: ImageModel, params: SidParams) -> float:
    """The detector's fixed misreading of ``image``, independent of payload"""
    if params.sigma_between == 0:
        return 0.0
    rng = rng_for(TAG_SID_BETWEEN, image.seed, image.id)
    return float(rng.normal(0.0, params.sigma_between))


def score_image(
    seed: int, image: ImageModel, rate_bpc: float, params: SidParams
) -> float:
    if not rate_bpc >= 0 or not math.isfinite(rate_bpc):
        raise ParameterError("rate_bpc", rate_bpc, "must be finite and >= 0")
    params.validate()
    noise = 0.0
    if params.sigma_within > 0:
        noise = float(rng_for(TAG_SID_WITHIN, seed).normal(0.0, params.sigma_within))
    raw = params.gain * rate_bpc + params.bias + image_offset(image, params) + noise
    return float(np.clip(raw, -params.saturation, params.saturation))


def score_bag(
    seed: int,
    bag: Bag,
    allocation: Optional[Allocation],
    params: SidParams,
) -> ScoredBag:
    """Score every image of a bag; ``allocation=None`` scores it as cover"""
    if allocation is None:
        rates = np.zeros(bag.b)
        label, strategy = Label.COVER, None
    else:
        if allocation.b != bag.b:
            raise ParameterError(
                "allocation", allocation.b, f"length must match bag size {bag.b}"
            )
        rates = allocation.bits_per_image / bag.n_coeffs
        label, strategy = Label.STEGO, allocation.strategy
    scores = np.array(
        [
            score_image(child_seed(TAG_SCORE, seed, bag.bag_id, i), image, r, params)
            for i, (image, r) in enumerate(zip(bag.images, rates))
        ]
    )
    return ScoredBag(bag.bag_id, scores, label, strategy, rates)


def single_image_error(
    params: SidParams, rate_bpc: float, n: int = 20000, seed: int = 0
) -> float:
    """
    Monte Carlo P_e of the bare detector on single images at ``rate_bpc``,
    thresholded at the best cut; a calibration figure for the score model.
    """
    rng = rng_for(TAG_SCORE, seed, n)
    sd = math.hypot(params.sigma_between, params.sigma_within)
    cover = params.bias + rng.normal(0.0, sd, n)
    stego = params.gain * rate_bpc + params.bias + rng.normal(0.0, sd, n)
    cap = params.saturation
    _, pe = optimize_threshold(np.clip(cover, -cap, cap), np.clip(stego, -cap, cap))
    return pe


def score_rows(bags: Sequence[ScoredBag]) -> List[Dict[str, object]]:
    return [
        {
            "bag_id": bag.bag_id,
            "image_id": i,
            "score": repr(float(score)),
            "label": bag.label.value,
            "strategy": bag.strategy_name,
            "rate_bpc": repr(float(rate)),
        }
        for bag in bags
        for i, (score, rate) in enumerate(zip(bag.scores, bag.true_rates))
    ]


def write_scores(path: Path, bags: Sequence[ScoredBag]) -> None:
    write_csv_atomic(path, score_rows(bags), SCORE_CSV_HEADER)


def _parse_float(path: Path, line: int, key: str, text: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ScoreFileError(path, line, f"{key} {text!r} is not a number")
    if not math.isfinite(value):
        raise ScoreFileError(path, line, f"{key} {text!r} is not finite")
    return value


def _parse_int(path: Path, line: int, key: str, text: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ScoreFileError(path, line, f"{key} {text!r} is not an integer")


def load_scores(path: Path, beta: float = 0.5) -> List[ScoredBag]:
    """
    Read a score CSV (bag_id,image_id,score,label,strategy,rate_bpc) into
    bags grouped by bag_id, scores ordered by image_id.
    """
    path = Path(path)
    rows: Dict[int, Dict[int, tuple]] = {}
    meta: Dict[int, tuple] = {}
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise ScoreFileError(path, 0, e.strerror or str(e)) from e
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            return []
        if [h.strip() for h in header] != SCORE_CSV_HEADER:
            expected = ",".join(SCORE_CSV_HEADER)
            raise ScoreFileError(path, 1, f"header must be {expected}")
        for record in reader:
            line = reader.line_num
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != len(SCORE_CSV_HEADER):
                raise ScoreFileError(
                    path,
                    line,
                    f"expected {len(SCORE_CSV_HEADER)} fields, got {len(record)}",
                )
            bag_id_s, image_id_s, score_s, label_s, strategy_s, rate_s = (
                cell.strip() for cell in record
            )
            bag_id = _parse_int(path, line, "bag_id", bag_id_s)
            image_id = _parse_int(path, line, "image_id", image_id_s)
            score = _parse_float(path, line, "score", score_s)
            rate = _parse_float(path, line, "rate_bpc", rate_s)
            if label_s not in LABELS:
                raise ScoreFileError(
                    path, line, f"label {label_s!r} must be cover or stego"
                )
            label = Label(label_s)
            strategy = None
            if strategy_s != "none":
                try:
                    strategy = StrategyId.parse(strategy_s, beta)
                except ParameterError:
                    raise ScoreFileError(path, line, f"unknown strategy {strategy_s!r}")
            if label is Label.COVER and (strategy is not None or rate != 0):
                raise ScoreFileError(
                    path, line, "cover rows need strategy none and rate 0"
                )
            if label is Label.STEGO and strategy is None:
                raise ScoreFileError(path, line, "stego rows need a strategy")
            bag_meta = (label, strategy_s)
            if meta.setdefault(bag_id, bag_meta) != bag_meta:
                raise ScoreFileError(
                    path, line, f"bag {bag_id} mixes labels or strategies"
                )
            images = rows.setdefault(bag_id, {})
            if image_id in images:
                raise ScoreFileError(
                    path, line, f"duplicate row for bag {bag_id}, image {image_id}"
                )
            images[image_id] = (score, rate, strategy)

    bags = []
    for bag_id in sorted(rows):
        ordered = [rows[bag_id][i] for i in sorted(rows[bag_id])]
        bags.append(
            ScoredBag(
                bag_id=bag_id,
                scores=np.array([r[0] for r in ordered]),
                label=meta[bag_id][0],
                strategy=ordered[0][2],
                true_rates=np.array([r[1] for r in ordered]),
            )
        )
    logger.info("Loaded %d bags from %s", len(bags), path)
    return bags
