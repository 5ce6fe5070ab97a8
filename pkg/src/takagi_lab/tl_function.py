"""Signed Takagi-Landsberg functions.

A function is a roughness index H in (0, 1) plus a sign source: the series
sum over generations m of 2**(m*(1/2-H)) * sum_k theta[m,k] * e[m,k].  At any
point t at most one basis member per generation is nonzero, so evaluation
descends a single dyadic branch, one lookup per generation.

Evaluation is exact at dyadic rationals (the branch terminates) and
eps-accurate elsewhere via the sharp tail bound
sum_{m>=n} 2**(-m*H-1) = 2**(-n*H) / (2*(1 - 2**-H)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .coeffs import ALL_PLUS, HALF_NEGATED, CoefficientSource

__all__ = [
    "Hurst",
    "SignedTLFunction",
    "TimePoint",
    "tail_bound",
    "truncation_level",
    "evaluate_truncated",
    "evaluate",
    "evaluate_with_level",
    "symmetry_partner",
    "classic",
    "oscillation_extremal",
]

TimePoint = Union[float, Fraction, int]


@dataclass(frozen=True)
class Hurst:
    """Validated roughness index H in (0, 1).

    `exact` keeps the rational value when H was given as a Fraction or a
    string ("1/3", "0.25"); raw floats are treated as inexact.  Equality
    decisions such as p == 1/H are only made on exact values -- they cannot
    be decided in floating point.

    Derived quantities: p_star = 1/H (the variation exponent) and
    lam = 2**(H-1), the parameter of the associated Bernoulli convolution.
    """

    value: float
    exact: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.value < 1.0:
            raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.value}")
        if self.exact is not None:
            if not 0 < self.exact < 1:
                raise ValueError(f"Hurst parameter must lie in (0, 1), got {self.exact}")
            if float(self.exact) != self.value:
                raise ValueError("float value does not match the exact rational")

    @classmethod
    def parse(cls, h: Union["Hurst", str, Fraction, float, int]) -> "Hurst":
        if isinstance(h, Hurst):
            return h
        if isinstance(h, str):
            h = Fraction(h)
        if isinstance(h, Fraction):
            return cls(float(h), h)
        return cls(float(h))

    @property
    def p_star(self) -> float:
        return 1.0 / self.value

    @property
    def p_exact(self) -> Optional[Fraction]:
        return None if self.exact is None else 1 / self.exact

    @property
    def lam(self) -> float:
        return 2.0 ** (self.value - 1.0)

    @property
    def log2_lam(self) -> Fraction:
        """Exponent of lam as an exact rational (uses the float's exact value
        when no rational was supplied; every float is a rational)."""
        return (self.exact if self.exact is not None else Fraction(self.value)) - 1


def _as_hurst(h) -> Hurst:
    return Hurst.parse(h)


def tail_bound(hurst: Hurst, n: int) -> float:
    """Uniform bound on the omitted tail beyond generation n."""
    if n < 0:
        raise ValueError("truncation level must be >= 0")
    H = hurst.value
    return 2.0 ** (-n * H - 1.0) / (1.0 - 2.0 ** (-H))


def truncation_level(hurst: Hurst, eps: float) -> int:
    """Smallest n with tail_bound(hurst, n) <= eps."""
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    H = hurst.value
    denom = 1.0 - 2.0 ** (-H)
    n = max(0, math.ceil(-math.log2(2.0 * eps * denom) / H)) if 2.0 * eps * denom < 1.0 else 0
    while tail_bound(hurst, n) > eps:
        n += 1
    while n > 0 and tail_bound(hurst, n - 1) <= eps:
        n -= 1
    return n


@dataclass(frozen=True)
class SignedTLFunction:
    """One member of the signed class: Hurst index plus sign source."""

    hurst: Hurst
    coeffs: CoefficientSource

    def eval_truncated(self, n: int, t: TimePoint) -> float:
        return evaluate_truncated(self, n, t)

    def eval(self, t: TimePoint, eps: float) -> float:
        return evaluate(self, t, eps)

    def tail(self, n: int) -> float:
        return tail_bound(self.hurst, n)


def evaluate_truncated(x: SignedTLFunction, n: int, t: TimePoint) -> float:
    """Partial sum over generations m < n at t in [0, 1].

    t is converted to an exact rational (floats are dyadic rationals), so
    the branch offsets and tent arguments are computed without rounding;
    the only roundings are the final per-term float operations.  At a
    dyadic t the descent terminates once the remainder hits zero, which
    makes the result the exact function value there.
    """
    if n < 0:
        raise ValueError("truncation level must be >= 0")
    tf = Fraction(t)
    if not 0 <= tf <= 1:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    num, den = tf.numerator, tf.denominator
    H = x.hurst.value
    acc = 0.0
    for m in range(n):
        k, rem = divmod(num << m, den)
        if rem == 0:
            break
        tent = min(rem, den - rem) / den
        acc += x.coeffs.get(m, k) * (2.0 ** (-m * H) * tent)
    return acc


def evaluate_with_level(x: SignedTLFunction, t: TimePoint, eps: float) -> tuple[float, int]:
    n = truncation_level(x.hurst, eps)
    return evaluate_truncated(x, n, t), n


def evaluate(x: SignedTLFunction, t: TimePoint, eps: float) -> float:
    """Value within eps of x(t): truncates at the smallest adequate level."""
    return evaluate_with_level(x, t, eps)[0]


def symmetry_partner(t: TimePoint) -> TimePoint:
    """Mirror point 1 - t.  The all-plus function satisfies x(t) = x(1-t)."""
    return 1 - t


def classic(h) -> SignedTLFunction:
    """The all-plus member x with Hurst index h."""
    return SignedTLFunction(_as_hurst(h), ALL_PLUS)


def oscillation_extremal(h) -> SignedTLFunction:
    """The half-negated member attaining the maximal uniform oscillation.

    It coincides with the classic function on [0, 1/2] and equals
    1/2 - x(t - 1/2) on [1/2, 1].
    """
    return SignedTLFunction(_as_hurst(h), HALF_NEGATED)
