# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import pytest

from src.pooled_stego_lab.config import ExperimentConfig
from src.pooled_stego_lab.cover_source import CoverParams
from src.pooled_stego_lab.sid import SidParams


def tiny_config(**changes):
    """Configuration small enough for a unit test to run every stage"""
    settings = dict(
        bag_sizes=(2,),
        bptc=0.1,
        strategies=("linear",),
        n_train_pairs=12,
        n_test_pairs=12,
        runs=1,
        p=10,
        cover_params=CoverParams(n_coeffs=64),
    )
    settings.update(changes)
    return ExperimentConfig(**settings)


@pytest.fixture
def noiseless():
    return SidParams(sigma_between=0.0, sigma_within=0.0)
