# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Synthetic cover source.

Images are reduced to what the embedding simulator needs: a cost per
coefficient and a residual variance per coefficient. Both are log-normal,
and a per-image offset on the log-cost spreads images between easy and hard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .constants import TAG_BAG, TAG_IMAGE
from .errors import ParameterError
from .seeding import child_seed, rng_for


@dataclass(frozen=True)
class CoverParams:
    n_coeffs: int = 4096
    cost_log_mean: float = 0.0
    cost_log_sd: float = 1.0
    var_log_mean: float = 0.0
    var_log_sd: float = 0.5
    heterogeneity: float = 0.5

    def validate(self) -> None:
        if int(self.n_coeffs) != self.n_coeffs or self.n_coeffs < 1:
            raise ParameterError("n_coeffs", self.n_coeffs, "must be an int >= 1")
        for name in ("cost_log_mean", "var_log_mean"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(name, getattr(self, name), "must be finite")
        for name in ("cost_log_sd", "var_log_sd"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(name, value, "must be >= 0")
        if not 0.0 <= self.heterogeneity <= 1.0:
            raise ParameterError(
                "heterogeneity", self.heterogeneity, "must lie in [0, 1]"
            )


@dataclass(frozen=True, eq=False)
class ImageModel:
    """A synthetic image: embedding costs and cover-model variances"""

    id: int
    costs: np.ndarray
    variances: np.ndarray
    seed: int = 0
    cost_offset: float = 0.0

    def __post_init__(self) -> None:
        costs = np.array(self.costs, dtype=np.float64)
        variances = np.array(self.variances, dtype=np.float64)
        if costs.ndim != 1 or costs.size < 1:
            raise ParameterError("costs", costs.shape, "must be a non-empty vector")
        if variances.shape != costs.shape:
            raise ParameterError(
                "variances", variances.shape, f"must match costs {costs.shape}"
            )
        if np.any(costs < 0) or not np.all(np.isfinite(costs)):
            raise ParameterError("costs", "...", "must be finite and >= 0")
        if np.any(variances <= 0) or not np.all(np.isfinite(variances)):
            raise ParameterError("variances", "...", "must be finite and > 0")
        costs.flags.writeable = False
        variances.flags.writeable = False
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "variances", variances)

    @property
    def n_coeffs(self) -> int:
        return int(self.costs.size)


@dataclass(frozen=True, eq=False)
class Bag:
    images: List[ImageModel] = field(default_factory=list)
    bag_id: int = 0

    def __post_init__(self) -> None:
        if len(self.images) < 1:
            raise ParameterError("b", len(self.images), "a bag holds >= 1 image")
        ids = [image.id for image in self.images]
        if len(set(ids)) != len(ids):
            raise ParameterError("images", ids, "image ids must be unique in a bag")

    @property
    def b(self) -> int:
        return len(self.images)

    @property
    def n_coeffs(self) -> np.ndarray:
        return np.array([image.n_coeffs for image in self.images], dtype=np.int64)


def gen_image(seed: int, id: int, params: CoverParams) -> ImageModel:
    """Draw one image, deterministic in (seed, id, params)"""
    params.validate()
    rng = rng_for(TAG_IMAGE, seed, id)
    offset = float(rng.uniform(-params.heterogeneity, params.heterogeneity))
    costs = rng.lognormal(
        params.cost_log_mean + offset, params.cost_log_sd, params.n_coeffs
    )
    variances = rng.lognormal(params.var_log_mean, params.var_log_sd, params.n_coeffs)
    return ImageModel(
        id=id, costs=costs, variances=variances, seed=seed, cost_offset=offset
    )


def image_seed(seed: int, bag_id: int, index: int) -> int:
    """Child seed of the image at ``index`` in bag ``bag_id``"""
    return child_seed(TAG_BAG, seed, bag_id, index)


def gen_bag(seed: int, bag_id: int, b: int, params: CoverParams) -> Bag:
    if int(b) != b or b < 1:
        raise ParameterError("b", b, "bag size must be an int >= 1")
    images = [gen_image(image_seed(seed, bag_id, i), i, params) for i in range(b)]
    return Bag(images=images, bag_id=bag_id)


def gen_bags(seed: int, n_bags: int, b: int, params: CoverParams) -> List[Bag]:
    if int(n_bags) != n_bags or n_bags < 0:
        raise ParameterError("n_bags", n_bags, "must be an int >= 0")
    return [gen_bag(seed, bag_id, b, params) for bag_id in range(n_bags)]


def merge_images(images: Sequence[ImageModel]) -> ImageModel:
    """Concatenate the cost and variance maps of several images into one"""
    if not images:
        raise ParameterError("images", 0, "nothing to merge")
    return ImageModel(
        id=-1,
        costs=np.concatenate([image.costs for image in images]),
        variances=np.concatenate([image.variances for image in images]),
    )
