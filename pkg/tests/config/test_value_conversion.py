# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
import pytest

from src.pooled_stego_lab.config import (
    _convert_to_boolean,
    _get_conv,
    _split_list,
)
from src.pooled_stego_lab.errors import ConfigValueError


@pytest.mark.parametrize(
    "raw, expected",
    [("yes", True), ("On", True), ("1", True), ("no", False), ("FALSE", False)],
)
def test_convert_to_boolean(raw, expected):
    assert _convert_to_boolean(raw) is expected


def test_convert_to_boolean_rejects_other_words():
    with pytest.raises(ValueError):
        _convert_to_boolean("maybe")


def test_get_int_conv():
    should_be_int = _get_conv("runs", "12", 10)
    assert isinstance(should_be_int, int)
    assert should_be_int == 12


def test_get_int_conv_accepts_integral_float():
    assert _get_conv("runs", 3.0, 10) == 3


def test_get_float_conv():
    should_be_float = _get_conv("bptc", "0.25", 0.1)
    assert isinstance(should_be_float, float)
    assert should_be_float == 0.25


def test_get_float_conv_from_json_int():
    assert _get_conv("svm_C", 2, 1.0) == 2.0


def test_get_bool_conv():
    assert _get_conv("calibrate_delta", "true", False) is True


def test_get_tuple_conv_keeps_item_type():
    assert _get_conv("bag_sizes", "2, 10, 50", (2, 4)) == (2, 10, 50)
    assert _get_conv("bag_sizes", [2, 10], (2, 4)) == (2, 10)


def test_get_tuple_conv_of_strings():
    assert _get_conv("strategies", "[linear,greedy]", ("ims",)) == (
        "linear",
        "greedy",
    )


@pytest.mark.parametrize(
    "key, raw, default",
    [
        ("runs", "ten", 10),
        ("runs", 2.5, 10),
        ("runs", True, 10),
        ("bptc", "abc", 0.1),
        ("bptc", False, 0.1),
        ("calibrate_delta", "perhaps", False),
        ("pool_domain", 3, "scores"),
        ("bag_sizes", "2,x", (2, 4)),
    ],
)
def test_get_conv_raises_config_value_error(key, raw, default):
    with pytest.raises(ConfigValueError) as excinfo:
        _get_conv(key, raw, default)
    assert excinfo.value.key == key


def test_split_list_drops_blank_items():
    assert _split_list("a, ,b,") == ["a", "b"]
