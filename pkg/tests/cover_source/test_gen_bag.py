# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import itertools

import numpy as np
import pytest

from src.pooled_stego_lab.cover_source import (
    Bag,
    CoverParams,
    gen_bag,
    gen_bags,
    gen_image,
    merge_images,
)
from src.pooled_stego_lab.errors import ParameterError

PARAMS = CoverParams(n_coeffs=4096)


def test_single_image_bag():
    bag = gen_bag(5, 0, 1, PARAMS)
    assert bag.b == 1
    assert bag.images[0].id == 0


def test_images_in_a_bag_are_distinct():
    bag = gen_bag(5, 2, 4, PARAMS)
    assert [image.id for image in bag.images] == [0, 1, 2, 3]
    for a, b in itertools.combinations(bag.images, 2):
        assert not np.array_equal(a.costs, b.costs)


def test_gen_bag_is_deterministic():
    first = gen_bag(9, 4, 3, PARAMS)
    second = gen_bag(9, 4, 3, PARAMS)
    for a, b in zip(first.images, second.images):
        assert np.array_equal(a.costs, b.costs)
        assert np.array_equal(a.variances, b.variances)


def test_images_are_uncorrelated_within_and_across_bags():
    images = gen_bag(1, 0, 4, PARAMS).images + gen_bag(1, 1, 4, PARAMS).images
    logs = [np.log(image.costs) for image in images]
    for a, b in itertools.combinations(logs, 2):
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.1


def test_bag_sizes_report_per_image_coefficients():
    bag = gen_bag(0, 0, 3, CoverParams(n_coeffs=100))
    assert bag.n_coeffs.tolist() == [100, 100, 100]


@pytest.mark.parametrize("b", [0, -1, 2.5])
def test_bad_bag_size_is_rejected(b):
    with pytest.raises(ParameterError):
        gen_bag(0, 0, b, PARAMS)


def test_bag_rejects_duplicate_ids():
    image = gen_image(0, 0, CoverParams(n_coeffs=8))
    with pytest.raises(ParameterError):
        Bag(images=[image, image])
    with pytest.raises(ParameterError):
        Bag(images=[])


def test_gen_bags_numbers_bags():
    bags = gen_bags(3, 5, 2, CoverParams(n_coeffs=8))
    assert [bag.bag_id for bag in bags] == [0, 1, 2, 3, 4]
    assert gen_bags(3, 0, 2, PARAMS) == []


def test_merge_images_concatenates_maps():
    bag = gen_bag(0, 0, 3, CoverParams(n_coeffs=10))
    merged = merge_images(bag.images)
    assert merged.n_coeffs == 30
    assert np.array_equal(merged.costs[10:20], bag.images[1].costs)
    assert np.array_equal(merged.variances[20:], bag.images[2].variances)
    with pytest.raises(ParameterError):
        merge_images([])
