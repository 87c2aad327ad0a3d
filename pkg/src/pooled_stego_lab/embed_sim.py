# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Payload-limited sender simulation.

For a multiplier lambda every coefficient changes by +1 or -1 with
probability beta = exp(-lambda*rho) / (1 + 2*exp(-lambda*rho)) each. The
payload, the expected distortion and the deflection of the cover model are
all strictly decreasing in lambda, so any of them can be targeted by a
bisection on lambda.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import xlogy

from .constants import (
    LAMBDA_CAP,
    LAMBDA_HI_START,
    LAMBDA_LO,
    MAX_BISECTION_STEPS,
    SOLVER_ATOL,
    SOLVER_RTOL,
)
from .cover_source import ImageModel
from .errors import InfeasibleTargetError, ParameterError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_LN2 = math.log(2.0)
_BETA_MAX = 1.0 / 3.0


class Target(str, Enum):
    PAYLOAD = "payload"
    DISTORTION = "distortion"
    DEFLECTION = "deflection"


@dataclass(frozen=True, eq=False)
class EmbedSolution:
    lam: float
    change_rates: np.ndarray
    payload_bits: float
    distortion: float
    deflection: float

    def value(self, target: Target) -> float:
        """Return the functional selected by ``target``"""
        return {
            Target.PAYLOAD: self.payload_bits,
            Target.DISTORTION: self.distortion,
            Target.DEFLECTION: self.deflection,
        }[Target(target)]


def _maybe_scalar(result: np.ndarray, *inputs) -> ArrayLike:
    if all(np.ndim(x) == 0 for x in inputs):
        return float(result)
    return result


def change_rate(lam: ArrayLike, cost: ArrayLike) -> ArrayLike:
    """Probability of a +1 change (equal to that of a -1 change)"""
    lam_arr = np.asarray(lam, dtype=np.float64)
    cost_arr = np.asarray(cost, dtype=np.float64)
    if np.any(lam_arr < 0) or np.any(np.isnan(lam_arr)):
        raise ParameterError("lambda", lam, "must be >= 0")
    if np.any(cost_arr < 0) or np.any(np.isnan(cost_arr)):
        raise ParameterError("cost", cost, "must be >= 0")
    return _maybe_scalar(_rates(lam_arr, cost_arr), lam, cost)


def _rates(lam: np.ndarray, cost: np.ndarray) -> np.ndarray:
    z = np.exp(-lam * cost)
    return z / (1.0 + 2.0 * z)


def _h3(beta: np.ndarray) -> np.ndarray:
    rest = 1.0 - 2.0 * beta
    return -(2.0 * xlogy(beta, beta) + xlogy(rest, rest)) / _LN2


def ternary_entropy(beta: ArrayLike) -> ArrayLike:
    """Entropy in bits of the ternary change law {+1: b, -1: b, 0: 1-2b}"""
    arr = np.asarray(beta, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > _BETA_MAX + 1e-15) or np.any(np.isnan(arr)):
        raise ParameterError("beta", beta, "must lie in [0, 1/3]")
    return _maybe_scalar(_h3(np.clip(arr, 0.0, _BETA_MAX)), beta)


def evaluate(image: ImageModel, lam: float) -> EmbedSolution:
    if not lam >= 0 or not math.isfinite(lam):
        raise ParameterError("lambda", lam, "must be finite and >= 0")
    beta = _rates(np.float64(lam), image.costs)
    beta.flags.writeable = False
    return EmbedSolution(
        lam=float(lam),
        change_rates=beta,
        payload_bits=float(np.sum(_h3(beta))),
        distortion=float(np.sum(2.0 * beta * image.costs)),
        deflection=float(2.0 * np.sum(beta**2 / image.variances**2)),
    )


class ImageStack:
    """
    Several images padded into one matrix so that per-image functionals and
    per-image solves run as single vectorized passes.
    """

    def __init__(self, images: Sequence[ImageModel]) -> None:
        if not images:
            raise ParameterError("images", 0, "need at least one image")
        sizes = [image.n_coeffs for image in images]
        width = max(sizes)
        self.size = len(images)
        self.costs = np.zeros((self.size, width))
        self.inv_var2 = np.zeros((self.size, width))
        self.mask: Optional[np.ndarray] = None
        if min(sizes) != width:
            self.mask = np.zeros((self.size, width), dtype=bool)
        for row, image in enumerate(images):
            n = image.n_coeffs
            self.costs[row, :n] = image.costs
            self.inv_var2[row, :n] = 1.0 / image.variances**2
            if self.mask is not None:
                self.mask[row, :n] = True

    def functional(
        self,
        lams: np.ndarray,
        target: Target,
        rows: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Per-row value of ``target`` at the per-row multipliers ``lams``"""
        costs = self.costs if rows is None else self.costs[rows]
        beta = _rates(np.asarray(lams, dtype=np.float64)[:, None], costs)
        target = Target(target)
        if target is Target.PAYLOAD:
            terms = _h3(beta)
        elif target is Target.DISTORTION:
            terms = 2.0 * beta * costs
        else:
            inv_var2 = self.inv_var2 if rows is None else self.inv_var2[rows]
            terms = 2.0 * beta**2 * inv_var2
        if self.mask is not None:
            mask = self.mask if rows is None else self.mask[rows]
            terms = np.where(mask, terms, 0.0)
        return terms.sum(axis=1)

    def supremum(self, target: Target) -> np.ndarray:
        """Per-row limit of ``target`` as lambda goes to zero"""
        return self.functional(np.zeros(self.size), target)

    def derivatives(
        self,
        lams: np.ndarray,
        targets: Sequence[Target],
        rows: Optional[np.ndarray] = None,
    ) -> List[Tuple[np.ndarray, np.ndarray]]:
        """
        Per-row value and lambda-derivative of every functional in ``targets``,
        computed from one pass over the change rates.
        """
        costs = self.costs if rows is None else self.costs[rows]
        lam = np.asarray(lams, dtype=np.float64)[:, None]
        z = np.exp(-lam * costs)
        beta = z / (1.0 + 2.0 * z)
        dbeta = -costs * beta * (1.0 - 2.0 * beta)
        mask = self.mask
        if mask is not None and rows is not None:
            mask = mask[rows]
        out = []
        for target in targets:
            target = Target(target)
            if target is Target.PAYLOAD:
                # H3(beta) * ln 2 = 2 * beta * lambda * rho + log(1 + 2z)
                value = (2.0 * beta * lam * costs + np.log1p(2.0 * z)) / _LN2
                slope = 2.0 * lam * costs * dbeta / _LN2
            elif target is Target.DISTORTION:
                value = 2.0 * beta * costs
                slope = 2.0 * costs * dbeta
            else:
                inv_var2 = self.inv_var2 if rows is None else self.inv_var2[rows]
                value = 2.0 * beta**2 * inv_var2
                slope = 4.0 * beta * dbeta * inv_var2
            if mask is not None:
                value = np.where(mask, value, 0.0)
                slope = np.where(mask, slope, 0.0)
            out.append((value.sum(axis=1), slope.sum(axis=1)))
        return out

    def _check_values(self, target: Target, values) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64).reshape(self.size)
        if np.any(values < 0) or np.any(np.isnan(values)):
            raise ParameterError("value", values.tolist(), "must be >= 0")
        sup = self.supremum(target)
        over = values > sup * (1.0 + SOLVER_RTOL) + SOLVER_ATOL
        if np.any(over):
            row = int(np.flatnonzero(over)[0])
            raise InfeasibleTargetError(target.value, values[row], sup[row])
        return values

    def _bracket(
        self, target: Target, values: np.ndarray, tol: np.ndarray, lo, hi
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Settle the rows saturated at ``lo`` or capped at LAMBDA_CAP and double
        ``hi`` of the others until [lo, hi] brackets their root. Returns the
        current iterate, the settled rows and the bracket.
        """
        lo = np.full(self.size, LAMBDA_LO) if lo is None else np.array(lo, float)
        hi = np.full(self.size, LAMBDA_HI_START) if hi is None else np.array(hi, float)
        lam = hi.copy()
        done = np.zeros(self.size, dtype=bool)

        f_lo = self.functional(lo, target)
        saturated = f_lo <= values + tol
        lam[saturated] = lo[saturated]
        done |= saturated

        f_hi = self.functional(hi, target)
        growing = ~done & (f_hi > values + tol)
        while np.any(growing & (hi < LAMBDA_CAP)):
            rows = np.flatnonzero(growing & (hi < LAMBDA_CAP))
            lo[rows] = hi[rows]
            hi[rows] *= 2.0
            f_hi[rows] = self.functional(hi[rows], target, rows)
            growing[rows] = f_hi[rows] > values[rows] + tol[rows]
        lam = np.where(done, lam, hi)
        capped = ~done & (f_hi > values + tol)
        if np.any(capped):
            logger.debug("%d rows reached the lambda cap", int(capped.sum()))
        done |= capped | (np.abs(f_hi - values) <= tol)
        return lam, done, lo, hi

    def solve(
        self,
        target: Target,
        values: np.ndarray,
        lo: Optional[np.ndarray] = None,
        hi: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Find per-row multipliers whose ``target`` functional equals ``values``.

        ``lo``/``hi`` may bracket the roots from a previous solve; without
        them the bracket starts at [LAMBDA_LO, 1] and ``hi`` is doubled until
        the functional falls below the requested value.
        """
        target = Target(target)
        values = self._check_values(target, values)
        tol = np.maximum(SOLVER_RTOL * values, SOLVER_ATOL)
        lam, done, lo, hi = self._bracket(target, values, tol, lo, hi)

        steps = 0
        while steps < MAX_BISECTION_STEPS and not np.all(done):
            rows = np.flatnonzero(~done)
            mid = np.sqrt(lo[rows] * hi[rows])
            stalled = (mid <= lo[rows]) | (mid >= hi[rows])
            f_mid = self.functional(mid, target, rows)
            above = f_mid > values[rows]
            lo[rows[above]] = mid[above]
            hi[rows[~above]] = mid[~above]
            lam[rows] = mid
            done[rows] = stalled | (np.abs(f_mid - values[rows]) <= tol[rows])
            steps += 1
        logger.debug(
            "%s solve: %d rows, %d bisection steps", target.value, self.size, steps
        )
        return lam

    def solve_newton(
        self,
        target: Target,
        values: np.ndarray,
        lam0: Optional[np.ndarray] = None,
        lo: Optional[np.ndarray] = None,
        hi: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        Same roots as ``solve``, reached by Newton steps on log(F) against
        log(lambda). A step that leaves the current bracket is replaced by
        the geometric midpoint, so the bracket shrinks on every step.

        Given both ``lo`` and ``hi``, the bracket is trusted as is, ``lam0``
        is the first iterate and ``values`` are not checked against the
        supremum.
        """
        target = Target(target)
        if lo is None or hi is None:
            values = self._check_values(target, values)
            tol = np.maximum(SOLVER_RTOL * values, SOLVER_ATOL)
            lam, done, lo, hi = self._bracket(target, values, tol, lo, hi)
        else:
            values = np.asarray(values, dtype=np.float64).reshape(self.size)
            tol = np.maximum(SOLVER_RTOL * values, SOLVER_ATOL)
            lo, hi = np.array(lo, dtype=np.float64), np.array(hi, dtype=np.float64)
            lam = hi.copy() if lam0 is None else np.array(lam0, dtype=np.float64)
            lam = np.clip(lam, lo, hi)
            done = np.zeros(self.size, dtype=bool)

        f = np.zeros(self.size)
        df = np.zeros(self.size)
        rows = np.flatnonzero(~done)
        if rows.size:
            f[rows], df[rows] = self.derivatives(lam[rows], (target,), rows)[0]
            done[rows] = np.abs(f[rows] - values[rows]) <= tol[rows]

        steps = 0
        while steps < MAX_BISECTION_STEPS and not np.all(done):
            rows = np.flatnonzero(~done)
            lam_r, f_r, v_r = lam[rows], f[rows], values[rows]
            above = f_r > v_r
            lo[rows] = np.where(above, lam_r, lo[rows])
            hi[rows] = np.where(above, hi[rows], lam_r)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                step = (np.log(f_r) - np.log(v_r)) * f_r / (lam_r * df[rows])
                newton = lam_r * np.exp(-step)
            inside = np.isfinite(newton) & (newton > lo[rows]) & (newton < hi[rows])
            nxt = np.where(inside, newton, np.sqrt(lo[rows] * hi[rows]))
            stalled = (nxt <= lo[rows]) | (nxt >= hi[rows])
            lam[rows] = nxt
            f[rows], df[rows] = self.derivatives(nxt, (target,), rows)[0]
            done[rows] = stalled | (np.abs(f[rows] - v_r) <= tol[rows])
            steps += 1
        logger.debug(
            "%s newton solve: %d rows, %d steps", target.value, self.size, steps
        )
        return lam


def supremum(image: ImageModel, target: Target) -> float:
    return float(ImageStack([image]).supremum(target)[0])


def solve_lambda_batch(
    images: Sequence[ImageModel], target: Target, values: Sequence[float]
) -> np.ndarray:
    return ImageStack(images).solve(target, np.asarray(values, dtype=np.float64))


def solve_lambda(
    image: ImageModel, target: Target, value: float, newton: bool = False
) -> EmbedSolution:
    """Solve for the multiplier whose ``target`` functional equals ``value``"""
    stack = ImageStack([image])
    solver = stack.solve_newton if newton else stack.solve
    lam = solver(target, np.array([value], dtype=np.float64))
    return evaluate(image, float(lam[0]))
