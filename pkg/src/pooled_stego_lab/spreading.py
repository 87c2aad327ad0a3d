# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Batch spreading strategies: how one message of ``total_bits`` bits is split
over the images of a bag.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from .constants import (
    CAPACITY_RTOL,
    DEFAULT_BETA,
    GREEDY_BPC_CAP,
    LAMBDA_CAP,
    LEVEL_RTOL,
    LOG2_3,
    MAX_BISECTION_STEPS,
    SOLVER_ATOL,
    SOLVER_RTOL,
    TAG_ORDER,
)
from .cover_source import Bag, merge_images
from .embed_sim import ImageStack, Target, solve_lambda
from .errors import InfeasibleAllocationError, InfeasibleTargetError, ParameterError
from .seeding import rng_for

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    GREEDY = "greedy"
    LINEAR = "linear"
    USES_BETA = "usesbeta"
    IMS = "ims"
    DELS = "dels"
    DILS = "dils"


@dataclass(frozen=True)
class StrategyId:
    kind: Strategy
    beta: float = DEFAULT_BETA

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Strategy(self.kind))
        if not 0.0 < self.beta <= 1.0:
            raise ParameterError("beta", self.beta, "must lie in (0, 1]")

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def parse(cls, name: str, beta: float = DEFAULT_BETA) -> StrategyId:
        try:
            return cls(Strategy(name.strip().lower()), beta)
        except ValueError:
            choices = ", ".join(s.value for s in Strategy)
            raise ParameterError("strategy", name, f"expected one of {choices}")


ALL_STRATEGIES = [StrategyId(kind) for kind in Strategy]


@dataclass(frozen=True, eq=False)
class Allocation:
    bits_per_image: np.ndarray
    strategy: StrategyId
    total_bits: float
    lambdas: Optional[np.ndarray] = None
    level: Optional[float] = None

    @property
    def b(self) -> int:
        return int(self.bits_per_image.size)


def total_bits_for(bag: Bag, bptc: float) -> float:
    if not bptc >= 0 or not math.isfinite(bptc):
        raise ParameterError("bptc", bptc, "must be finite and >= 0")
    return float(bptc * bag.n_coeffs.sum())


def _check_total(strategy: Strategy, total_bits: float) -> None:
    if not total_bits >= 0 or not math.isfinite(total_bits):
        raise ParameterError(
            "total_bits", total_bits, f"{strategy.value} needs a finite count >= 0"
        )


def _check_shares(strategy: Strategy, bag: Bag, bits: np.ndarray) -> None:
    capacity = bag.n_coeffs * LOG2_3
    over = bits > capacity * (1.0 + CAPACITY_RTOL)
    if np.any(over):
        i = int(np.flatnonzero(over)[0])
        raise InfeasibleAllocationError(
            strategy.value,
            f"image {bag.images[i].id} would carry {bits[i]:.6g} bits "
            f"over its capacity {capacity[i]:.6g}",
        )


def spread_greedy(bag: Bag, total_bits: float, seed: int) -> Allocation:
    """Fill randomly ordered images up to 1 bpc until the message runs out"""
    _check_total(Strategy.GREEDY, total_bits)
    caps = bag.n_coeffs * GREEDY_BPC_CAP
    if total_bits > caps.sum() * (1.0 + CAPACITY_RTOL):
        raise InfeasibleAllocationError(
            Strategy.GREEDY.value,
            f"{total_bits:.6g} bits exceed the {GREEDY_BPC_CAP} bpc cap "
            f"of the bag ({caps.sum():.6g} bits)",
        )
    order = rng_for(TAG_ORDER, seed, bag.bag_id).permutation(bag.b)
    bits = np.zeros(bag.b)
    remaining = float(total_bits)
    for i in order:
        if remaining <= 0:
            break
        bits[i] = min(remaining, float(caps[i]))
        remaining -= bits[i]
    return Allocation(bits, StrategyId(Strategy.GREEDY), float(total_bits))


def spread_linear(bag: Bag, total_bits: float) -> Allocation:
    _check_total(Strategy.LINEAR, total_bits)
    bits = np.full(bag.b, total_bits / bag.b)
    _check_shares(Strategy.LINEAR, bag, bits)
    return Allocation(bits, StrategyId(Strategy.LINEAR), float(total_bits))


def carrier_count(b: int, beta: float) -> int:
    """ceil(beta * b), robust to products like 0.1 * 10 landing above 1"""
    return max(1, math.ceil(round(beta * b, 9)))


def spread_uses_beta(
    bag: Bag, total_bits: float, beta: float = DEFAULT_BETA, seed: int = 0
) -> Allocation:
    """Spread evenly over ceil(beta * b) randomly chosen carriers"""
    strategy = StrategyId(Strategy.USES_BETA, beta)
    _check_total(Strategy.USES_BETA, total_bits)
    k = carrier_count(bag.b, beta)
    bits = np.zeros(bag.b)
    if k == bag.b:
        bits[:] = total_bits / bag.b
    else:
        carriers = rng_for(TAG_ORDER, seed, bag.bag_id).choice(bag.b, k, replace=False)
        bits[carriers] = total_bits / k
    _check_shares(Strategy.USES_BETA, bag, bits)
    return Allocation(bits, strategy, float(total_bits))


def spread_ims(bag: Bag, total_bits: float) -> Allocation:
    """One multiplier over the merged cost map of the whole bag"""
    _check_total(Strategy.IMS, total_bits)
    try:
        merged = solve_lambda(
            merge_images(bag.images), Target.PAYLOAD, total_bits, newton=True
        )
    except InfeasibleTargetError as e:
        raise InfeasibleAllocationError(Strategy.IMS.value, str(e)) from e
    lams = np.full(bag.b, merged.lam)
    bits = ImageStack(bag.images).functional(lams, Target.PAYLOAD)
    return Allocation(
        bits, StrategyId(Strategy.IMS), float(total_bits), lams, merged.lam
    )


def _level_start(
    stack: ImageStack, bag: Bag, total_bits: float, target: Target
) -> float:
    """Mean ``target`` level of the images when the payload is shared evenly"""
    capacity = np.array([image.n_coeffs * LOG2_3 for image in bag.images])
    shares = np.minimum(total_bits / bag.b, 0.5 * capacity)
    lams = stack.solve_newton(Target.PAYLOAD, shares)
    return float(stack.functional(lams, target).mean())


def _spread_equal_level(
    bag: Bag, total_bits: float, target: Target, strategy: Strategy
) -> Allocation:
    """
    Find the common per-image level d of ``target`` whose payloads sum to
    ``total_bits``. The summed payload T(d) is increasing in d on
    [0, min_i sup_i]; d follows Newton steps on log T against log d, with
    dT/dd = sum_i P_i'(lambda_i) / F_i'(lambda_i), falling back to the
    geometric midpoint of the current d interval. Per-image multipliers are
    warm-started from the previous level and kept bracketed between their
    values at the two ends of that interval.
    """
    _check_total(strategy, total_bits)
    stack = ImageStack(bag.images)
    if total_bits == 0:
        lams = np.full(bag.b, LAMBDA_CAP)
        return Allocation(np.zeros(bag.b), StrategyId(strategy), 0.0, lams, 0.0)

    d_hi = float(stack.supremum(target).min())
    lam_at_hi = stack.solve_newton(target, np.full(bag.b, d_hi))
    reachable = float(stack.functional(lam_at_hi, Target.PAYLOAD).sum())
    if reachable < total_bits * (1.0 - SOLVER_RTOL):
        raise InfeasibleAllocationError(
            strategy.value,
            f"{total_bits:.6g} bits exceed the {reachable:.6g} bits reachable "
            f"at the largest common {target.value}",
        )

    d_lo = 0.0
    lam_at_lo = np.full(bag.b, LAMBDA_CAP)
    tol = max(LEVEL_RTOL * total_bits, SOLVER_ATOL)
    d = min(_level_start(stack, bag, total_bits, target), d_hi)
    guess = lam_at_hi
    for step in range(MAX_BISECTION_STEPS):
        lams = stack.solve_newton(
            target, np.full(bag.b, d), lam0=guess, lo=lam_at_hi, hi=lam_at_lo
        )
        (level, dlevel), (bits, dbits) = stack.derivatives(
            lams, (target, Target.PAYLOAD)
        )
        total = bits.sum()
        if abs(total - total_bits) <= tol:
            break
        if total > total_bits:
            d_hi, lam_at_hi = d, lams
        else:
            d_lo, lam_at_lo = d, lams
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            slope = np.sum(dbits / dlevel)
            log_step = (np.log(total_bits) - np.log(total)) * total / (d * slope)
            nxt = float(d * np.exp(log_step))
            shift = log_step * level / (lams * dlevel)
            guess = lams * np.exp(shift)
        if not (math.isfinite(nxt) and d_lo < nxt < d_hi):
            nxt = math.sqrt(d_lo * d_hi) if d_lo > 0 else 0.5 * d_hi
            guess = None
        if not d_lo < nxt < d_hi:
            break
        if guess is not None:
            guess = np.where(np.isfinite(guess), guess, lams)
        d = nxt
    logger.debug(
        "%s: level %.6g after %d steps, residual %.3g bits",
        strategy.value,
        d,
        step,
        total - total_bits,
    )
    return Allocation(bits, StrategyId(strategy), float(total_bits), lams, d)


def spread_dels(bag: Bag, total_bits: float) -> Allocation:
    """Equal deflection (detectability) per image"""
    return _spread_equal_level(bag, total_bits, Target.DEFLECTION, Strategy.DELS)


def spread_dils(bag: Bag, total_bits: float) -> Allocation:
    """Equal expected distortion per image"""
    return _spread_equal_level(bag, total_bits, Target.DISTORTION, Strategy.DILS)


def spread(bag: Bag, total_bits: float, strategy: StrategyId, seed: int) -> Allocation:
    kind = strategy.kind
    if kind is Strategy.GREEDY:
        return spread_greedy(bag, total_bits, seed)
    if kind is Strategy.LINEAR:
        return spread_linear(bag, total_bits)
    if kind is Strategy.USES_BETA:
        return spread_uses_beta(bag, total_bits, strategy.beta, seed)
    if kind is Strategy.IMS:
        return spread_ims(bag, total_bits)
    if kind is Strategy.DELS:
        return spread_dels(bag, total_bits)
    return spread_dils(bag, total_bits)


def allocation_rows(bag: Bag, allocation: Allocation) -> List[Dict[str, object]]:
    """CSV rows (bag_id, image_id, bits, strategy) of one allocation"""
    return [
        {
            "bag_id": bag.bag_id,
            "image_id": image.id,
            "bits": repr(float(bits)),
            "strategy": allocation.strategy.name,
        }
        for image, bits in zip(bag.images, allocation.bits_per_image)
    ]
