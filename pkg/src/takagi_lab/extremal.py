"""Extremes and regularity of the classic function and its signed class.

Closed forms implemented here, for 0 < H < 1:

* global maximum of the classic (all-plus) function:
      max x = 1 / (3 * (1 - 2**-H)),  attained exactly at t = 1/3 and 2/3;
* truncated maxima:  the level-n partial sum has its two maximizers at
      t_n = J_n / 2**n  and  1 - t_n,   J_n = (2**n - (-1)**n) / 3,
  with value
      M_n = 1/(3(1-2**-H)) + (-1)**(n-1)/(3(2**(1-H)+1) 2**n)
            - 2**(-n*H) / ((1+2**(1-H)) (2**H - 1)),
  and M_1 = 1/2 for every H; the recursions
      M_{n+1} = (M_n + M_{n-1})/2 + 2**(-n*H-1),  t_{n+1} = (t_n + t_{n-1})/2
  hold exactly;
* maximal uniform oscillation of the class:
      (2**H + 3) / (6 * (2**H - 1)),  attained by the half-negated member
  at the pair (1/3, 5/6);
* sharp modulus of continuity
      omega(h) = h * 2**((nu-1)(1-H)) / (2**(1-H) - 1)
                 + 2**((1-nu) H) / (3 (1 - 2**-H)),
  where nu = nu(h) is the unique integer with 2**(-nu-1) < h <= 2**-nu;
  |x(t+h) - x(t)| <= omega(h) for the classic function and
  <= 2**(1-H) * omega(h) uniformly over the class.  Along h_n = (2/3) 2**-n
  the classic function satisfies the exact identity
      x(h_n) = omega(h_n) - h_n / (2**(1-H) - 1),
  which drives the ratio |x(h_n)| / omega(h_n) to 1.

nu(h) is always read off the binary representation (never via a floating
log): the boundary case h = 2**-n must land on nu = n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Sequence, Union

import numpy as np

from .dyadic import grid_values
from .errors import LevelOverflowError
from .tl_function import (
    Hurst,
    SignedTLFunction,
    classic,
    evaluate,
    oscillation_extremal,
)

__all__ = [
    "ExtremeResult",
    "OscillationResult",
    "ModulusProfile",
    "ModulusCheckReport",
    "SharpnessResult",
    "MODULUS_MAX_LEVEL",
    "jacobsthal",
    "maximizer_low",
    "max_value",
    "truncated_max",
    "uniform_oscillation",
    "oscillation_gap",
    "nu",
    "omega",
    "modulus_check",
    "modulus_scan",
    "sharpness_sequence",
    "truncated_max_rows",
    "write_truncated_max_csv",
    "write_modulus_table_csv",
    "write_sharpness_csv",
]

MODULUS_MAX_LEVEL = 22


@dataclass(frozen=True)
class ExtremeResult:
    value: float
    locations: tuple[float, ...]
    level: Union[int, None] = None


@dataclass(frozen=True)
class OscillationResult:
    value: float
    s: float
    t: float


def jacobsthal(n: int) -> int:
    """J_n = (2**n - (-1)**n) / 3: 1, 1, 3, 5, 11, 21, ..."""
    if n < 0:
        raise ValueError("index must be >= 0")
    return ((1 << n) - (-1) ** n) // 3


def maximizer_low(n: int) -> Fraction:
    """Exact left maximizer of the level-n partial sum: J_n / 2**n."""
    if n < 1:
        raise ValueError("level must be >= 1")
    return Fraction(jacobsthal(n), 1 << n)


def max_value(hurst) -> ExtremeResult:
    h = Hurst.parse(hurst)
    return ExtremeResult(1.0 / (3.0 * (1.0 - 2.0 ** (-h.value))), (1 / 3, 2 / 3))


def truncated_max(hurst, n: int) -> ExtremeResult:
    h = Hurst.parse(hurst)
    if n < 1:
        raise ValueError("level must be >= 1")
    H = h.value
    value = (
        1.0 / (3.0 * (1.0 - 2.0 ** (-H)))
        + (-1.0) ** (n - 1) / (3.0 * (2.0 ** (1.0 - H) + 1.0) * 2.0 ** n)
        - 2.0 ** (-n * H) / ((1.0 + 2.0 ** (1.0 - H)) * (2.0 ** H - 1.0))
    )
    t_low = maximizer_low(n)
    return ExtremeResult(value, (float(t_low), float(1 - t_low)), n)


def uniform_oscillation(hurst) -> OscillationResult:
    h = Hurst.parse(hurst)
    value = (2.0 ** h.value + 3.0) / (6.0 * (2.0 ** h.value - 1.0))
    return OscillationResult(value, 1 / 3, 5 / 6)


def oscillation_gap(hurst, eps: float = 1e-10) -> tuple[float, float]:
    """(measured, predicted) oscillation of the half-negated member between
    its maximizing pair; measured = x(1/3) - x(5/6) via eps-evaluation."""
    xt = oscillation_extremal(hurst)
    measured = evaluate(xt, Fraction(1, 3), eps) - evaluate(xt, Fraction(5, 6), eps)
    return measured, uniform_oscillation(hurst).value


def nu(h: Union[float, Fraction]) -> int:
    """The integer with 2**(-nu-1) < h <= 2**-nu, from the binary exponent."""
    if isinstance(h, Fraction):
        if not 0 < h < 1:
            raise ValueError(f"h must lie in (0, 1), got {h}")
        # b/a in [2**nu, 2**(nu+1))  <=>  bit_length(b // a) == nu + 1
        return (h.denominator // h.numerator).bit_length() - 1
    if not 0.0 < h < 1.0:
        raise ValueError(f"h must lie in (0, 1), got {h}")
    frac, exp = math.frexp(h)  # h = frac * 2**exp, frac in [0.5, 1)
    return 1 - exp if frac == 0.5 else -exp


def omega(hurst, h: Union[float, Fraction]) -> float:
    """Sharp modulus of continuity at step h in (0, 1)."""
    hh = Hurst.parse(hurst)
    H = hh.value
    v = nu(h)
    hf = float(h)
    return (
        hf * 2.0 ** ((v - 1) * (1.0 - H)) / (2.0 ** (1.0 - H) - 1.0)
        + 2.0 ** ((1 - v) * H) / (3.0 * (1.0 - 2.0 ** (-H)))
    )


class ModulusProfile:
    """nu(h) and omega(h) bound to one Hurst index."""

    def __init__(self, hurst) -> None:
        self.hurst = Hurst.parse(hurst)

    def nu(self, h: Union[float, Fraction]) -> int:
        return nu(h)

    def omega(self, h: Union[float, Fraction]) -> float:
        return omega(self.hurst, h)


def _omega_dyadic(hurst: Hurst, n: int, j: np.ndarray) -> np.ndarray:
    """Vectorized omega at h = j * 2**-n (exact dyadic floats)."""
    H = hurst.value
    h = j * 2.0 ** (-n)
    frac, exp = np.frexp(h)
    v = np.where(frac == 0.5, 1 - exp, -exp)
    return (
        h * np.exp2((v - 1) * (1.0 - H)) / (2.0 ** (1.0 - H) - 1.0)
        + np.exp2((1 - v) * H) / (3.0 * (1.0 - 2.0 ** (-H)))
    )


@dataclass(frozen=True)
class ModulusCheckReport:
    max_ratio: float
    t: float          # left point of the worst pair
    h: float          # step of the worst pair
    n_grid: int
    bound_factor: float


def modulus_scan(x: SignedTLFunction, n_grid: int, bound_factor: float = 1.0):
    """Per-step maxima of |x(t+h) - x(t)| / (factor * omega(h)) on the grid.

    Returns (h, omega, ratio, argmax_t) arrays indexed by the step
    j = 1 .. 2**n_grid - 1; the scan covers every dyadic pair at that level
    except the trivial h = 1 pair (both endpoints vanish).
    """
    if n_grid < 1:
        raise ValueError("grid level must be >= 1")
    if n_grid > MODULUS_MAX_LEVEL:
        raise LevelOverflowError(
            f"grid level {n_grid} exceeds maximum {MODULUS_MAX_LEVEL}"
        )
    v = grid_values(x, n_grid, max_level=n_grid)
    steps = (1 << n_grid) - 1
    j = np.arange(1, steps + 1)
    omegas = _omega_dyadic(x.hurst, n_grid, j)
    ratios = np.empty(steps)
    arg_t = np.empty(steps)
    scale = 2.0 ** (-n_grid)
    for step in range(1, steps + 1):
        diffs = np.abs(v[step:] - v[:-step])
        i = int(np.argmax(diffs))
        ratios[step - 1] = diffs[i] / (bound_factor * omegas[step - 1])
        arg_t[step - 1] = i * scale
    return j * scale, omegas, ratios, arg_t


def modulus_check(x: SignedTLFunction, n_grid: int,
                  bound_factor: float = 1.0) -> ModulusCheckReport:
    """Worst ratio |x(t+h) - x(t)| / (factor * omega(h)) over the grid;
    the contract is <= 1 + 1e-9 for the classic function with factor 1 and
    for any member with factor 2**(1-H)."""
    h, _, ratios, arg_t = modulus_scan(x, n_grid, bound_factor)
    i = int(np.argmax(ratios))
    return ModulusCheckReport(float(ratios[i]), float(arg_t[i]), float(h[i]),
                              n_grid, bound_factor)


@dataclass(frozen=True)
class SharpnessResult:
    n: int
    h: float
    lhs: float          # x(h_n) for the classic function
    omega_h: float
    ratio: float
    identity_gap: float  # lhs - (omega(h_n) - h_n/(2**(1-H)-1))


def sharpness_sequence(hurst, n: int, *, eps: float = 1e-12) -> SharpnessResult:
    """Sharpness probe along h_n = (2/3) * 2**-n (so nu(h_n) = n).

    The classic function satisfies x(h_n) = omega(h_n) - h_n/(2**(1-H)-1)
    exactly; the residual of that identity is reported as identity_gap and
    the ratio x(h_n)/omega(h_n) approaches 1 geometrically.
    """
    h = Hurst.parse(hurst)
    if n < 2:
        raise ValueError("sharpness sequence starts at level 2")
    h_n = Fraction(1, 3 * (1 << (n - 1)))  # (2/3) * 2**-n
    lhs = evaluate(classic(h), h_n, eps)
    om = omega(h, h_n)
    rhs = om - float(h_n) / (2.0 ** (1.0 - h.value) - 1.0)
    return SharpnessResult(n, float(h_n), lhs, om, lhs / om, lhs - rhs)


# ---------------------------------------------------------------------------
# report rows / writers


def truncated_max_rows(hurst, n_max: int) -> list[tuple[int, float, float]]:
    return [
        (n, truncated_max(hurst, n).value, float(maximizer_low(n)))
        for n in range(1, n_max + 1)
    ]


def write_truncated_max_csv(stream: IO[str], hurst, n_max: int) -> None:
    stream.write("n,M_n,t_n\n")
    for n, m, t in truncated_max_rows(hurst, n_max):
        stream.write(f"{n},{m!r},{t!r}\n")


def write_modulus_table_csv(stream: IO[str], x: SignedTLFunction, n_grid: int,
                            bound_factor: float = 1.0) -> None:
    h, om, ratios, _ = modulus_scan(x, n_grid, bound_factor)
    stream.write("h,omega,max_ratio\n")
    for hv, ov, rv in zip(h.tolist(), om.tolist(), ratios.tolist()):
        stream.write(f"{hv!r},{ov!r},{rv!r}\n")


def write_sharpness_csv(stream: IO[str], hurst,
                        results: Sequence[SharpnessResult]) -> None:
    stream.write("n,h,lhs,omega,ratio,identity_gap\n")
    for r in results:
        stream.write(
            f"{r.n},{r.h!r},{r.lhs!r},{r.omega_h!r},{r.ratio!r},{r.identity_gap!r}\n"
        )
