# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #

from __future__ import annotations

from pathlib import Path
from typing import Any


class LabError(Exception):
    """Base class of every error raised by the lab"""


class ParameterError(LabError, ValueError):
    """Raised when a numeric argument or parameter object is invalid"""

    def __init__(self, name: str, value: Any, reason: str):
        self.name = name
        self.value = value
        msg = f"Invalid parameter '{name}' = {value!r}: {reason}"
        super().__init__(msg)


class InfeasibleTargetError(LabError):
    """Raised when a solver target lies above the reachable supremum"""

    def __init__(self, target: str, value: float, supremum: float):
        self.target = target
        self.value = value
        self.supremum = supremum
        msg = f"Target {target}={value!r} exceeds its supremum {supremum!r}"
        super().__init__(msg)


class InfeasibleAllocationError(LabError):
    """Raised when a spreading strategy cannot place the message in the bag"""

    def __init__(self, strategy: str, reason: str):
        self.strategy = strategy
        msg = f"Strategy '{strategy}' cannot spread the payload: {reason}"
        super().__init__(msg)


class ScoreFileError(LabError):
    """Raised when a score file row cannot be ingested"""

    def __init__(self, path: Path | str, line: int, reason: str):
        self.path = path
        self.line = line
        msg = f"{path}, line {line}: {reason}"
        super().__init__(msg)


class DegenerateRangeError(LabError):
    """Raised when Parzen centers are fit on a constant set of scores"""

    def __init__(self, value: float):
        msg = f"All training scores equal {value!r}, cannot place centers"
        super().__init__(msg)


class TrainingError(LabError):
    """Raised when a pooling model cannot be trained on the given data"""

    def __init__(self, reason: str):
        super().__init__(f"Training failed: {reason}")


class ConfigMismatchError(LabError):
    """Raised when a model and the data or config it is applied to disagree"""

    def __init__(self, what: str, expected: Any, got: Any):
        self.what = what
        msg = f"Mismatch in {what}: expected {expected!r}, got {got!r}"
        super().__init__(msg)


class SkipBudgetExceededError(LabError):
    """Raised when too many stego bags were infeasible for their strategy"""

    def __init__(self, skipped: int, total: int, budget: float):
        msg = (
            f"{skipped} of {total} stego bags were infeasible, "
            f"more than the allowed fraction {budget}"
        )
        super().__init__(msg)


class ConfigError(LabError):
    """Base class of configuration errors, reported as usage errors"""


class UnknownConfigKeyError(ConfigError):
    """Raised when a config file or override references an undefined key"""

    def __init__(self, key: str):
        self.key = key
        super().__init__(f"Config key '{key}' is not defined")


class ConfigValueError(ConfigError):
    """Raised when a config value cannot be converted to the expected type"""

    def __init__(self, key: str, value: Any, expected: str):
        self.key = key
        msg = f"Invalid value {value!r} for key '{key}', expected {expected}"
        super().__init__(msg)


class ConfigFileError(ConfigError):
    """Raised when a config or input file cannot be read or parsed"""

    def __init__(self, path: Path | str, reason: str):
        self.path = path
        super().__init__(f"Cannot read '{path}': {reason}")
