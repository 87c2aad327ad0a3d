# ======================================================================= #
#  Copyright (C) 2026 pooled-stego-lab contributors                       #
#                                                                         #
#  This file may be distributed under the terms of the GNU GPLv3 license  #
# ======================================================================= #
"""
Deterministic seed derivation.

All randomness in the lab is drawn from numpy generators seeded by
``child_seed``, which folds its parts through the splitmix64 finalizer.
Python's ``hash()`` is salted per process and must never be used here.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One splitmix64 step: advance by the golden gamma and finalize"""
    z = (x + _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def child_seed(*parts: int) -> int:
    """Mix an ordered tuple of integers into one 64-bit seed"""
    state = 0
    for part in parts:
        state = splitmix64(state ^ (int(part) & _MASK64))
    return state


def rng_for(*parts: int) -> np.random.Generator:
    """Return a fresh generator for the stream identified by ``parts``"""
    return np.random.default_rng(child_seed(*parts))
