# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Tuple

from .artifacts import read_json
from .constants import BOOLEAN_STATES, LIST_VALUE_RE, OVERRIDE_RE, POOL_DOMAINS
from .cover_source import CoverParams
from .errors import ConfigValueError, ParameterError, UnknownConfigKeyError
from .sid import SidParams
from .spreading import Strategy, StrategyId

DEFAULT_BAG_SIZES = (2, 4, 6, 10, 20, 50, 100, 200)


@dataclass(frozen=True)
class ExperimentConfig:
    bag_sizes: Tuple[int, ...] = DEFAULT_BAG_SIZES
    bptc: float = 0.1
    strategies: Tuple[str, ...] = tuple(s.value for s in Strategy)
    beta: float = 0.5
    n_train_pairs: int = 500
    n_test_pairs: int = 500
    runs: int = 10
    p: int = 100
    svm_C: float = 1.0
    svm_tol: float = 1e-5
    svm_max_iter: int = 200000
    master_seed: int = 0
    pool_domain: str = "scores"
    calibrate_delta: bool = False
    workers: int = 1
    max_skip_fraction: float = 0.001
    cover_params: CoverParams = field(default_factory=CoverParams)
    sid_params: SidParams = field(default_factory=SidParams)

    def validate(self) -> None:
        """Raise a ConfigValueError naming the first invalid key"""
        checks = {
            "bag_sizes": len(self.bag_sizes) >= 1 and min(self.bag_sizes) >= 1,
            "bptc": self.bptc > 0,
            "strategies": len(self.strategies) >= 1,
            "beta": 0 < self.beta <= 1,
            "n_train_pairs": self.n_train_pairs >= 1,
            "n_test_pairs": self.n_test_pairs >= 1,
            "runs": self.runs >= 1,
            "p": self.p >= 2,
            "svm_C": self.svm_C > 0,
            "svm_tol": self.svm_tol > 0,
            "svm_max_iter": self.svm_max_iter >= 1,
            "pool_domain": self.pool_domain in POOL_DOMAINS,
            "workers": self.workers >= 1,
            "max_skip_fraction": 0 <= self.max_skip_fraction <= 1,
        }
        for key, ok in checks.items():
            if not ok:
                raise ConfigValueError(key, getattr(self, key), "a valid setting")
        for name in self.strategies:
            if name not in {s.value for s in Strategy}:
                raise ConfigValueError("strategies", name, "a strategy name")
        if len(set(self.strategies)) != len(self.strategies):
            raise ConfigValueError("strategies", self.strategies, "distinct names")
        if len(set(self.bag_sizes)) != len(self.bag_sizes):
            raise ConfigValueError("bag_sizes", self.bag_sizes, "distinct sizes")
        for prefix, params in (
            ("cover_params", self.cover_params),
            ("sid_params", self.sid_params),
        ):
            try:
                params.validate()
            except ParameterError as e:
                raise ConfigValueError(f"{prefix}.{e.name}", e.value, "a valid setting")

    @property
    def strategy_ids(self) -> List[StrategyId]:
        return [StrategyId(Strategy(name), self.beta) for name in self.strategies]


def _convert_to_boolean(value: Any) -> bool:
    """Convert a string to a boolean"""
    if isinstance(value, bool):
        return value
    if not isinstance(value, str) or value.lower() not in BOOLEAN_STATES:
        raise ValueError("Not a boolean: %s" % value)
    return BOOLEAN_STATES[value.lower()]


def _convert_to_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("Not an int: %s" % value)
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError("Not an int: %s" % value)
        return int(value)
    return int(value)


def _convert_to_float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError("Not a float: %s" % value)
    return float(value)


def _convert_to_str(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError("Not a string: %s" % value)
    return value.strip()


def _split_list(value: Any) -> List[Any]:
    if isinstance(value, (list, tuple)):
        return list(value)
    if not isinstance(value, str):
        raise ValueError("Not a list: %s" % value)
    inner = LIST_VALUE_RE.match(value.strip()).group(1)
    return [item.strip() for item in inner.split(",") if item.strip()]


def _converter_for(default: Any) -> Callable[[Any], Any]:
    if isinstance(default, bool):
        return _convert_to_boolean
    if isinstance(default, int):
        return _convert_to_int
    if isinstance(default, float):
        return _convert_to_float
    if isinstance(default, str):
        return _convert_to_str
    if isinstance(default, tuple):
        item_conv = _converter_for(default[0]) if default else _convert_to_str
        return lambda value: tuple(item_conv(item) for item in _split_list(value))
    raise TypeError(f"no converter for {type(default).__name__}")


def _get_conv(key: str, value: Any, default: Any) -> Any:
    """Return ``value`` converted to the type of ``default``"""
    conv = _converter_for(default)
    try:
        return conv(value)
    except (ValueError, TypeError, AttributeError) as e:
        raise ConfigValueError(key, value, type(default).__name__) from e


def _merge(obj: Any, data: Dict[str, Any], prefix: str = "") -> Any:
    """Return a copy of dataclass ``obj`` with ``data`` merged in, key by key"""
    if not isinstance(data, dict):
        raise ConfigValueError(prefix.rstrip(".") or "<root>", data, "an object")
    names = {f.name for f in dataclasses.fields(obj)}
    changes = {}
    for key, value in data.items():
        dotted = f"{prefix}{key}"
        if key not in names:
            raise UnknownConfigKeyError(dotted)
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            changes[key] = _merge(current, value, f"{dotted}.")
        elif isinstance(value, dict) and value:
            raise UnknownConfigKeyError(f"{dotted}.{next(iter(value))}")
        else:
            changes[key] = _get_conv(dotted, value, current)
    return dataclasses.replace(obj, **changes)


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    config = _merge(ExperimentConfig(), data)
    config.validate()
    return config


def load_config(path: Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return config_from_dict(read_json(Path(path)))


def parse_override(line: str) -> Tuple[str, str]:
    """Split a 'dotted.key=value' override into key and raw value"""
    match = OVERRIDE_RE.match(line)
    if match is None:
        raise ConfigValueError(line, line, "an override of the form key=value")
    return match.group(1), match.group(2)


def apply_overrides(
    config: ExperimentConfig, overrides: Iterable[str]
) -> ExperimentConfig:
    for line in overrides:
        key, raw = parse_override(line)
        nested: Dict[str, Any] = {}
        node = nested
        *parents, leaf = key.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = raw
        config = _merge(config, nested)
    config.validate()
    return config


def config_to_dict(config: ExperimentConfig) -> Dict[str, Any]:
    """JSON-ready echo of a resolved config"""

    def plain(value: Any) -> Any:
        if isinstance(value, (list, tuple)):
            return [plain(v) for v in value]
        if isinstance(value, dict):
            return {k: plain(v) for k, v in value.items()}
        return value

    return plain(dataclasses.asdict(config))
