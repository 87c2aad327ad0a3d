# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import numpy as np
import pytest

from src.pooled_stego_lab.constants import LOG2_3
from src.pooled_stego_lab.errors import InfeasibleAllocationError, ParameterError
from src.pooled_stego_lab.spreading import (
    Strategy,
    StrategyId,
    allocation_rows,
    carrier_count,
    spread,
    spread_greedy,
    spread_linear,
    spread_uses_beta,
    total_bits_for,
)
from tests.spreading.conftest import make_bag


def test_total_bits_for():
    assert total_bits_for(make_bag([4096] * 4), 0.1) == pytest.approx(1638.4)
    assert total_bits_for(make_bag([1000, 3000]), 0.5) == pytest.approx(2000.0)
    assert total_bits_for(make_bag([10]), 0.0) == 0.0
    with pytest.raises(ParameterError):
        total_bits_for(make_bag([10]), -0.1)


def test_greedy_fills_images_up_to_one_bit_per_coefficient(three_equal_images):
    allocation = spread_greedy(three_equal_images, 1500.0, seed=3)
    assert sorted(allocation.bits_per_image.tolist()) == [0.0, 500.0, 1000.0]
    assert allocation.strategy.kind is Strategy.GREEDY


def test_greedy_at_full_cap(three_equal_images):
    allocation = spread_greedy(three_equal_images, 3000.0, seed=0)
    assert allocation.bits_per_image.tolist() == [1000.0, 1000.0, 1000.0]


def test_greedy_over_cap_is_infeasible(three_equal_images):
    with pytest.raises(InfeasibleAllocationError):
        spread_greedy(three_equal_images, 3001.0, seed=0)


def test_greedy_order_depends_on_seed_only():
    bag = make_bag([100] * 8)
    first = spread_greedy(bag, 250.0, seed=1).bits_per_image
    again = spread_greedy(bag, 250.0, seed=1).bits_per_image
    assert np.array_equal(first, again)
    orders = {
        tuple(spread_greedy(bag, 250.0, seed=s).bits_per_image.tolist())
        for s in range(20)
    }
    assert len(orders) > 1


def test_linear_splits_evenly(three_equal_images):
    allocation = spread_linear(three_equal_images, 1500.0)
    assert allocation.bits_per_image.tolist() == [500.0, 500.0, 500.0]
    assert allocation.total_bits == 1500.0


def test_linear_single_image():
    assert spread_linear(make_bag([10]), 7.0).bits_per_image.tolist() == [7.0]


def test_linear_over_capacity_is_infeasible(three_equal_images):
    with pytest.raises(InfeasibleAllocationError):
        spread_linear(three_equal_images, 3000 * LOG2_3 * 1.01)


def test_zero_message_gives_zero_bits(three_equal_images):
    for name in ("greedy", "linear", "usesbeta"):
        allocation = spread(three_equal_images, 0.0, StrategyId.parse(name), seed=0)
        assert np.all(allocation.bits_per_image == 0.0)


@pytest.mark.parametrize(
    "b, beta, k",
    [(4, 0.5, 2), (3, 0.5, 2), (10, 0.1, 1), (10, 0.3, 3), (5, 1.0, 5), (1, 0.1, 1)],
)
def test_carrier_count(b, beta, k):
    assert carrier_count(b, beta) == k


def test_uses_beta_spreads_over_half_the_bag():
    bag = make_bag([1000] * 4)
    allocation = spread_uses_beta(bag, 1000.0, beta=0.5, seed=2)
    assert sorted(allocation.bits_per_image.tolist()) == [0.0, 0.0, 500.0, 500.0]
    assert allocation.strategy.name == "usesbeta"
    assert allocation.strategy.beta == 0.5


def test_uses_beta_of_one_is_linear():
    bag = make_bag([300, 300, 300])
    uses = spread_uses_beta(bag, 500.0, beta=1.0, seed=9)
    linear = spread_linear(bag, 500.0)
    assert np.array_equal(uses.bits_per_image, linear.bits_per_image)


@pytest.mark.parametrize("beta", [0.0, -0.5, 1.5])
def test_uses_beta_rejects_bad_fraction(beta):
    with pytest.raises(ParameterError):
        spread_uses_beta(make_bag([10, 10]), 1.0, beta=beta)


def test_strategy_parse():
    assert StrategyId.parse(" DeLS ").kind is Strategy.DELS
    assert StrategyId.parse("usesbeta", 0.25).beta == 0.25
    with pytest.raises(ParameterError):
        StrategyId.parse("optimal")


def test_negative_message_is_rejected(three_equal_images):
    with pytest.raises(ParameterError):
        spread_linear(three_equal_images, -1.0)


def test_allocation_rows(three_equal_images):
    rows = allocation_rows(three_equal_images, spread_linear(three_equal_images, 30.0))
    assert [row["image_id"] for row in rows] == [0, 1, 2]
    assert all(float(row["bits"]) == 10.0 for row in rows)
    assert all(row["strategy"] == "linear" for row in rows)


@pytest.mark.parametrize("name", ["greedy", "linear", "usesbeta", "ims", "dels"])
def test_bad_message_length_names_the_strategy(three_equal_images, name):
    with pytest.raises(ParameterError) as excinfo:
        spread(three_equal_images, float("nan"), StrategyId.parse(name), seed=0)
    assert excinfo.value.name == "total_bits"
    assert name in str(excinfo.value)


@pytest.mark.parametrize("b, bptc", [(4, 0.5), (10, 0.3), (20, 0.1)])
def test_uses_beta_at_the_payload_rate_uses_greedy_carriers(b, bptc):
    bag = make_bag([1000] * b)
    total = total_bits_for(bag, bptc)
    greedy = spread_greedy(bag, total, seed=4).bits_per_image
    uses = spread_uses_beta(bag, total, beta=bptc, seed=4).bits_per_image
    assert np.count_nonzero(uses) == np.count_nonzero(greedy) == round(bptc * b)
    assert np.allclose(np.sort(uses), np.sort(greedy))
