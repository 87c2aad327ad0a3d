# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import math

import numpy as np
import pytest

from src.pooled_stego_lab.cover_source import (
    CoverParams,
    ImageModel,
    gen_bag,
    gen_image,
)
from src.pooled_stego_lab.errors import ParameterError
from src.pooled_stego_lab.sid import (
    Label,
    ScoredBag,
    SidParams,
    image_offset,
    score_bag,
    score_image,
    single_image_error,
)
from src.pooled_stego_lab.spreading import (
    Allocation,
    StrategyId,
    spread_greedy,
    spread_linear,
)

NOISELESS = SidParams(sigma_between=0.0, sigma_within=0.0)
IMAGE = ImageModel(0, np.ones(1000), np.ones(1000))


def test_noiseless_score_is_gain_times_rate():
    assert score_image(1, IMAGE, 0.4, NOISELESS) == pytest.approx(0.4)
    assert score_image(1, IMAGE, 0.0, NOISELESS) == 0.0
    params = SidParams(gain=2.0, bias=0.25, sigma_between=0.0, sigma_within=0.0)
    assert score_image(1, IMAGE, 0.4, params) == pytest.approx(1.05)


def test_scores_saturate():
    assert score_image(1, IMAGE, 5.0, NOISELESS) == 2.0
    params = SidParams(bias=-10.0, sigma_between=0.0, sigma_within=0.0)
    assert score_image(1, IMAGE, 0.1, params) == -2.0


def test_negative_rate_is_rejected():
    with pytest.raises(ParameterError):
        score_image(0, IMAGE, -0.1, NOISELESS)


def test_per_image_offset_does_not_depend_on_payload():
    params = SidParams(sigma_between=0.3, sigma_within=0.0)
    image = gen_image(8, 2, CoverParams(n_coeffs=16))
    low = score_image(5, image, 0.1, params)
    high = score_image(6, image, 0.3, params)
    assert high - low == pytest.approx(0.2, abs=1e-12)
    assert low == pytest.approx(0.1 + image_offset(image, params), abs=1e-12)


def test_score_noise_is_reproducible():
    image = gen_image(8, 2, CoverParams(n_coeffs=16))
    params = SidParams()
    assert score_image(3, image, 0.2, params) == score_image(3, image, 0.2, params)
    assert score_image(3, image, 0.2, params) != score_image(4, image, 0.2, params)


def test_mean_score_tracks_rate():
    params = SidParams()
    sd = math.hypot(params.sigma_between, params.sigma_within)
    n = 10000
    images = [ImageModel(i, np.ones(1), np.ones(1), seed=i) for i in range(n)]
    means = []
    for rate in (0.0, 0.1, 1.0):
        scores = np.array(
            [
                score_image(i + 7 * n, image, rate, params)
                for i, image in enumerate(images)
            ]
        )
        assert abs(scores.mean() - rate) < 4 * sd / math.sqrt(n)
        means.append(scores.mean())
    assert means[0] < means[1] < means[2]


def test_cover_bag_scores():
    bag = gen_bag(0, 0, 3, CoverParams(n_coeffs=32))
    params = SidParams(bias=0.25, sigma_between=0.0, sigma_within=0.0)
    scored = score_bag(1, bag, None, params)
    assert scored.label is Label.COVER
    assert scored.strategy is None
    assert scored.strategy_name == "none"
    assert np.allclose(scored.scores, 0.25)
    assert np.all(scored.true_rates == 0)


def test_linear_stego_bag_scores():
    bag = gen_bag(0, 0, 4, CoverParams(n_coeffs=1000))
    allocation = spread_linear(bag, 400.0)
    scored = score_bag(1, bag, allocation, NOISELESS)
    assert scored.label is Label.STEGO
    assert scored.strategy_name == "linear"
    assert np.allclose(scored.true_rates, 0.1)
    assert np.allclose(scored.scores, 0.1)


def test_greedy_stego_bag_scores():
    bag = gen_bag(0, 0, 3, CoverParams(n_coeffs=1000))
    scored = score_bag(1, bag, spread_greedy(bag, 1500.0, seed=2), NOISELESS)
    assert sorted(scored.scores.tolist()) == pytest.approx([0.0, 0.5, 1.0])


def test_allocation_length_must_match_bag():
    bag = gen_bag(0, 0, 3, CoverParams(n_coeffs=10))
    allocation = Allocation(np.ones(2), StrategyId.parse("linear"), 2.0)
    with pytest.raises(ParameterError):
        score_bag(0, bag, allocation, NOISELESS)


def test_scored_bag_checks_cover_rates():
    with pytest.raises(ParameterError):
        ScoredBag(0, np.zeros(2), "cover", None, np.array([0.0, 0.1]))
    with pytest.raises(ParameterError):
        ScoredBag(0, np.zeros(0), "cover")
    assert ScoredBag(0, np.zeros(2), "cover").label is Label.COVER


def test_single_image_error_falls_with_rate():
    params = SidParams()
    errors = [single_image_error(params, rate, n=5000) for rate in (0.0, 0.05, 0.2)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.05
    assert errors[0] <= 0.5


@pytest.mark.parametrize(
    "params",
    [
        SidParams(sigma_within=-0.1),
        SidParams(saturation=0.0),
        SidParams(gain=float("nan")),
    ],
)
def test_invalid_params_are_rejected(params):
    with pytest.raises(ParameterError):
        score_image(0, IMAGE, 0.1, params)
