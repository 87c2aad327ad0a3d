# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import numpy as np
import pytest

from src.pooled_stego_lab.cover_source import Bag, ImageModel


def make_bag(sizes, cost_scales=None, bag_id=0):
    """Bag of images with flat cost maps scaled per image"""
    if cost_scales is None:
        cost_scales = [1.0] * len(sizes)
    images = [
        ImageModel(i, np.full(n, scale), np.ones(n))
        for i, (n, scale) in enumerate(zip(sizes, cost_scales))
    ]
    return Bag(images=images, bag_id=bag_id)


@pytest.fixture
def three_equal_images():
    return make_bag([1000, 1000, 1000])
