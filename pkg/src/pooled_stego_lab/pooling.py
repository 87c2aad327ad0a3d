# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Pooling of per-image detector scores into one bag decision.

A bag of scores is turned into a fixed-size Parzen histogram over p equally
spaced centers and pooled by a linear max-margin classifier, or reduced to its
mean or maximum and compared against a threshold. Every decision rule reads
"stego iff statistic > threshold".
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .constants import POOL_DOMAINS
from .errors import (
    ConfigFileError,
    ConfigMismatchError,
    DegenerateRangeError,
    ParameterError,
    TrainingError,
)

logger = logging.getLogger(__name__)

_SPACING_RTOL = 1e-9
_FREE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ParzenConfig:
    centers: np.ndarray
    gamma: float

    def __post_init__(self) -> None:
        centers = np.array(self.centers, dtype=np.float64)
        if centers.ndim != 1 or centers.size < 2:
            raise ParameterError("p", centers.size, "need at least 2 centers")
        steps = np.diff(centers)
        if np.any(steps <= 0):
            raise ParameterError("centers", "...", "must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > _SPACING_RTOL * steps.mean():
            raise ParameterError("centers", "...", "must be equally spaced")
        if not self.gamma > 0:
            raise ParameterError("gamma", self.gamma, "must be > 0")
        centers.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def p(self) -> int:
        return int(self.centers.size)

    @property
    def spacing(self) -> float:
        return float((self.centers[-1] - self.centers[0]) / (self.p - 1))

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "centers": self.centers.tolist(), "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class LinearModel:
    """
    Pooling weights over histogram bins. ``objective_history`` holds the dual
    objective of the trainer, sampled during optimisation.
    """

    weights: np.ndarray
    intercept: float = 0.0
    delta: float = 0.0
    objective_history: Tuple[float, ...] = field(default=())
    kkt_gap: float = 0.0

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 1:
            raise ParameterError("weights", weights.shape, "must be a vector")
        object.__setattr__(self, "weights", weights)

    @property
    def p(self) -> int:
        return int(self.weights.size)

    def with_delta(self, delta: float) -> LinearModel:
        return LinearModel(
            self.weights,
            self.intercept,
            float(delta),
            self.objective_history,
            self.kkt_gap,
        )


def fit_parzen_config(
    training_scores: Sequence[float], p: int, gamma: float | None = None
) -> ParzenConfig:
    """
    Place p centers evenly on [min, max] of the training scores. The kernel
    width defaults to gamma = 1 / (2 * spacing**2), one spacing per standard
    deviation.
    """
    if int(p) != p or p < 2:
        raise ParameterError("p", p, "must be an int >= 2")
    scores = np.asarray(training_scores, dtype=np.float64).ravel()
    if scores.size == 0 or not np.all(np.isfinite(scores)):
        raise ParameterError("training_scores", scores.size, "need finite scores")
    lo, hi = float(scores.min()), float(scores.max())
    if hi == lo:
        raise DegenerateRangeError(lo)
    spacing = (hi - lo) / (p - 1)
    if gamma is None:
        gamma = 1.0 / (2.0 * spacing**2)
    return ParzenConfig(np.linspace(lo, hi, int(p)), gamma)


def parzen_histogram(scores: Sequence[float], config: ParzenConfig) -> np.ndarray:
    """h[j] = mean_i exp(-gamma * (f_i - c_j)**2), a vector of length p"""
    arr = np.sort(np.asarray(scores, dtype=np.float64).ravel())
    if arr.size == 0:
        raise ParameterError("scores", 0, "a bag needs at least one score")
    diff = arr[:, None] - config.centers[None, :]
    return np.exp(-config.gamma * diff**2).mean(axis=0)


def parzen_histograms(
    bags: Sequence[Sequence[float]], config: ParzenConfig
) -> np.ndarray:
    """Stack the histograms of several bags into an (n_bags, p) matrix"""
    if len(bags) == 0:
        return np.zeros((0, config.p))
    return np.vstack([parzen_histogram(scores, config) for scores in bags])


def _as_examples(features, labels) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise TrainingError(f"features {X.shape} do not match {y.size} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("labels must be -1 or +1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("need at least one example of each class")
    return X, y


def _example_weights(weights, m: int) -> np.ndarray:
    if weights is None:
        return np.ones(m)
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size != m:
        raise TrainingError(f"{w.size} weights for {m} examples")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise TrainingError("example weights must be finite and > 0")
    return w


def train_linear_svm(
    features: Sequence[np.ndarray],
    labels: Sequence[int],
    C: float = 1.0,
    tol: float = 1e-5,
    max_iter: int = 200000,
    log_every: int = 1000,
    weights: Optional[Sequence[float]] = None,
) -> LinearModel:
    """
    Soft-margin linear SVM with an unregularised intercept,

        min 1/2 |w|^2 + C * sum_i k_i max(0, 1 - y_i (w . h_i + b)),

    solved in the dual by sequential minimal optimisation with maximal
    violating pair selection. The weight vector is kept explicitly, so no
    kernel matrix is formed. Stops once the KKT gap falls below ``tol``.

    ``weights`` are the k_i (default 1), so an example of
    weight k counts as k copies of itself.
    """
    if not C > 0:
        raise ParameterError("C", C, "must be > 0")
    X, y = _as_examples(features, labels)
    m, p = X.shape
    box = C * _example_weights(weights, m)
    alpha = np.zeros(m)
    w = np.zeros(p)
    grad = -np.ones(m)
    sum_alpha = 0.0
    history = [0.0]
    gap = np.inf

    it = 0
    for it in range(1, max_iter + 1):
        score = -y * grad
        up = np.where(y > 0, alpha < box, alpha > 0)
        low = np.where(y > 0, alpha > 0, alpha < box)
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = float(score[i] - score[j])
        if gap < tol:
            break
        diff = X[i] - X[j]
        curv = max(float(diff @ diff), 1e-12)
        bound_i = box[i] - alpha[i] if y[i] > 0 else alpha[i]
        bound_j = alpha[j] if y[j] > 0 else box[j] - alpha[j]
        t = min(gap / curv, bound_i, bound_j)
        alpha[i] = min(max(alpha[i] + y[i] * t, 0.0), box[i])
        alpha[j] = min(max(alpha[j] - y[j] * t, 0.0), box[j])
        sum_alpha += (y[i] - y[j]) * t
        w += t * diff
        grad += y * t * (X @ diff)
        if it % log_every == 0:
            history.append(0.5 * float(w @ w) - sum_alpha)
            logger.debug("svm iter %d: dual %.9g, gap %.3g", it, history[-1], gap)
    else:
        logger.warning("svm stopped at max_iter=%d with KKT gap %.3g", max_iter, gap)
    history.append(0.5 * float(w @ w) - sum_alpha)

    score = -y * grad
    free = (alpha > _FREE_EPS) & (alpha < box - _FREE_EPS)
    if np.any(free):
        intercept = float(score[free].mean())
    else:
        up = np.where(y > 0, alpha < box, alpha > 0)
        low = np.where(y > 0, alpha > 0, alpha < box)
        intercept = 0.5 * float(score[up].max() + score[low].min())
    logger.debug(
        "svm trained on %d x %d in %d iterations, %d support vectors",
        m,
        p,
        it,
        int(np.count_nonzero(alpha > _FREE_EPS)),
    )
    return LinearModel(w, intercept, 0.0, tuple(history), max(gap, 0.0))


def hinge_objective(
    model: LinearModel, features, labels, C: float = 1.0, weights=None
) -> float:
    """Primal objective 1/2 |w|^2 + C * total (weighted) hinge loss"""
    X, y = _as_examples(features, labels)
    margins = y * (X @ model.weights + model.intercept)
    loss = _example_weights(weights, y.size) * np.maximum(0.0, 1.0 - margins)
    return 0.5 * float(model.weights @ model.weights) + C * float(loss.sum())


def svm_margin(model: LinearModel, h: np.ndarray) -> float:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != model.weights.shape:
        raise ConfigMismatchError("histogram dimension", model.p, h.shape[-1])
    return float(model.weights @ h + model.intercept)


def svm_margins(model: LinearModel, H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != model.p:
        raise ConfigMismatchError("histogram dimension", model.p, H.shape[-1])
    return H @ model.weights + model.intercept


def scalar_pool(scores: Sequence[float], kind: str) -> float:
    arr = np.sort(np.asarray(scores, dtype=np.float64).ravel())
    if arr.size == 0:
        raise ParameterError("scores", 0, "cannot pool an empty bag")
    if kind == "mean":
        return float(arr.mean())
    if kind == "max":
        return float(arr[-1])
    raise ParameterError("kind", kind, "expected mean or max")


def pool_statistic(
    scores: Sequence[float],
    kind: str,
    domain: str = "scores",
    config: ParzenConfig | None = None,
) -> float:
    """g_mean / g_max statistic on raw scores or on the bag's Parzen histogram"""
    if domain not in POOL_DOMAINS:
        raise ParameterError("pool_domain", domain, f"expected one of {POOL_DOMAINS}")
    if domain == "histogram":
        if config is None:
            raise ParameterError("config", None, "histogram pooling needs centers")
        return scalar_pool(parzen_histogram(scores, config), kind)
    return scalar_pool(scores, kind)


def error_rate(neg_stats, pos_stats, tau: float) -> float:
    """P_e = (P_fa + P_md) / 2 of the rule 'stego iff statistic > tau'"""
    neg = np.asarray(neg_stats, dtype=np.float64)
    pos = np.asarray(pos_stats, dtype=np.float64)
    if neg.size == 0 or pos.size == 0:
        raise ParameterError("stats", (neg.size, pos.size), "both classes needed")
    return 0.5 * (float(np.mean(neg > tau)) + float(np.mean(pos <= tau)))


def optimize_threshold(neg_stats, pos_stats) -> Tuple[float, float]:
    """
    Threshold minimising the empirical P_e under equal priors. Candidate cuts
    are -inf, +inf and the midpoints between adjacent distinct pooled values;
    ties go to the smaller cut.
    """
    neg = np.sort(np.asarray(neg_stats, dtype=np.float64).ravel())
    pos = np.sort(np.asarray(pos_stats, dtype=np.float64).ravel())
    if neg.size == 0 or pos.size == 0:
        raise ParameterError("stats", (neg.size, pos.size), "both classes needed")
    values = np.unique(np.concatenate([neg, pos]))
    cuts = np.concatenate([[-np.inf], 0.5 * (values[:-1] + values[1:]), [np.inf]])
    p_fa = (neg.size - np.searchsorted(neg, cuts, side="right")) / neg.size
    p_md = np.searchsorted(pos, cuts, side="right") / pos.size
    pe = 0.5 * (p_fa + p_md)
    k = int(np.argmin(pe))
    return float(cuts[k]), float(pe[k])


def model_to_dict(
    model: LinearModel, config: ParzenConfig, pool_domain: str = "scores"
) -> Dict[str, Any]:
    return {
        **config.to_dict(),
        "weights": model.weights.tolist(),
        "intercept": model.intercept,
        "delta": model.delta,
        "pool_domain": pool_domain,
    }


def model_from_dict(
    data: Dict[str, Any], source: str = "<model>"
) -> Tuple[LinearModel, ParzenConfig, str]:
    """Rebuild a trained pooler; a missing or malformed field names ``source``"""
    try:
        config = ParzenConfig(data["centers"], data["gamma"])
        model = LinearModel(
            data["weights"], float(data["intercept"]), float(data["delta"])
        )
        domain = str(data.get("pool_domain", "scores"))
        p = int(data["p"])
    except KeyError as e:
        raise ConfigFileError(source, f"missing field '{e.args[0]}'") from e
    except (TypeError, ValueError) as e:
        raise ConfigFileError(source, f"not a model: {e}") from e
    if p != config.p:
        raise ConfigMismatchError("model p vs centers", p, config.p)
    if model.p != config.p:
        raise ConfigMismatchError("model p vs weights", config.p, model.p)
    return model, config, domain
