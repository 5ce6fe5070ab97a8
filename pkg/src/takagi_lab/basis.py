"""Tent-function basis on the unit interval.

The generation-m member with offset k is supported on [k/2**m, (k+1)/2**m],
rises linearly with slope +-2**(m/2) to its peak 2**(-m/2)/2 at the midpoint
of the support, and vanishes at every dyadic point of level m.  All members
are defined on the whole real line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["FSIndex", "eval_e00", "eval_emk"]


@dataclass(frozen=True)
class FSIndex:
    """Generation m >= 0 and offset 0 <= k < 2**m of a basis member."""

    m: int
    k: int

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError(f"generation must be >= 0, got {self.m}")
        if not 0 <= self.k < (1 << self.m):
            raise ValueError(f"offset {self.k} out of range for generation {self.m}")

    @property
    def support(self) -> tuple[float, float]:
        return (math.ldexp(self.k, -self.m), math.ldexp(self.k + 1, -self.m))


def eval_e00(t: float) -> float:
    """Mother tent (min{t, 1-t})^+, peaking at 1/2 with value 1/2."""
    return max(0.0, min(t, 1.0 - t))


def eval_emk(idx: FSIndex, t: float) -> float:
    """2**(-m/2) * e00(2**m * t - k).

    2**m * t is a power-of-two scaling and therefore exact in binary
    floating point, so the value at a dyadic t is computed without any
    rounding in the argument.
    """
    return 2.0 ** (-0.5 * idx.m) * eval_e00(math.ldexp(t, idx.m) - idx.k)
