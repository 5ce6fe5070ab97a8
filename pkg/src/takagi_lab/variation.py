"""p-th variation sums along the dyadic partitions.

V_n(p, t) sums |x(s') - x(s)|**p over level-n cells whose left endpoint s
satisfies s <= t, matching the partition-sum convention used throughout this
package (the alternative "cell contained in [0, t]" differs by one term).

For p = 1/H the sums converge linearly in t with slope
2**(1 - 1/H) * E[|Z|**(1/H)] where Z is the Bernoulli convolution with
parameter 2**(H-1); p above/below 1/H sends V_n to 0 / infinity.  Signed
sums at odd integer p vanish exactly at every level, because the level-n
cell signs enumerate all of {-1,+1}**n, a set symmetric under negation.

Accumulation: each chunk is reduced with numpy's pairwise summation and the
chunk partials are combined with math.fsum (exactly rounded), so results do
not depend on worker scheduling or thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import IO, Optional, Sequence, Union

import numpy as np

from .bernoulli import BernoulliConvolution, even_moment, sample_abs_moment
from .dyadic import (
    DEFAULT_CHUNK_LEVEL,
    HARD_MAX_LEVEL,
    _check_level,
    increment_table,
    subtree_increments,
)
from .tl_function import Hurst, SignedTLFunction

__all__ = [
    "Regime",
    "SlopeEstimate",
    "SlopePoint",
    "VariationReport",
    "vn",
    "vn_signed",
    "classify_regime",
    "truncated_slope",
    "predicted_slope",
    "convergence_report",
    "slope_curve",
    "write_report_csv",
    "report_json_dict",
    "write_slope_curve_csv",
]

PValue = Union[float, int, Fraction]


class Regime(Enum):
    VANISHES = "VANISHES"
    DIVERGES = "DIVERGES"
    LINEAR = "LINEAR"


@dataclass(frozen=True)
class SlopeEstimate:
    value: float
    stderr: Optional[float]  # None when the value is exact
    method: str              # "recursion" or "monte-carlo"


@dataclass(frozen=True)
class VariationReport:
    h: float
    p: float
    t: float
    levels: tuple[tuple[int, float], ...]
    regime: Regime
    predicted_limit: float   # 0.0, inf, or t * slope
    mc_stderr: Optional[float] = None


def _included_cells(t, n: int) -> int:
    """Number of level-n cells with left endpoint <= t, for t in (0, 1]."""
    tf = Fraction(t)
    if not 0 < tf <= 1:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    return min((tf.numerator << n) // tf.denominator + 1, 1 << n)


def _power_sum(d: np.ndarray, p: float, signed: bool) -> float:
    if signed:
        return float(np.sum(d ** int(p)))
    a = np.abs(d)
    if p == 2.0:
        return float(np.sum(a * a))
    if float(p).is_integer() and 1 <= p <= 8:
        acc = a
        for _ in range(int(p) - 1):
            acc = acc * a
        return float(np.sum(acc))
    return float(np.sum(a ** p))


def _variation_sum(x: SignedTLFunction, p: float, t, n: int, *, signed: bool,
                   chunk_level: int, max_level: int, threads: int) -> float:
    if n < 1:
        raise ValueError("level must be >= 1")
    _check_level(n, min(max_level, HARD_MAX_LEVEL))
    count = _included_cells(t, n)
    if n <= chunk_level:
        d = increment_table(x, n, max_level=max_level).d
        return _power_sum(d[:count], p, signed)
    base_level = n - chunk_level
    base = increment_table(x, base_level).d
    chunk = 1 << chunk_level

    def job(j: int) -> float:
        take = min(count - (j << chunk_level), chunk)
        d = subtree_increments(x, float(base[j]), base_level, j, chunk_level)
        return _power_sum(d[:take], p, signed)

    jobs = [j for j in range(base.size) if (j << chunk_level) < count]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(job, jobs))
    else:
        partials = [job(j) for j in jobs]
    return math.fsum(partials)


def vn(x: SignedTLFunction, p: float, t, n: int, *,
       chunk_level: int = DEFAULT_CHUNK_LEVEL,
       max_level: int = HARD_MAX_LEVEL, threads: int = 1) -> float:
    """Sum of |increment|**p over level-n cells with left endpoint <= t."""
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    return _variation_sum(x, float(p), t, n, signed=False,
                          chunk_level=chunk_level, max_level=max_level,
                          threads=threads)


def vn_signed(x: SignedTLFunction, p: int, t, n: int, *,
              chunk_level: int = DEFAULT_CHUNK_LEVEL,
              max_level: int = HARD_MAX_LEVEL, threads: int = 1) -> float:
    """Signed sum of increment**p for odd positive integer p.

    At t = 1 the exact value is 0 at every level and for every member of
    the class; floating point leaves only pairwise-summation residue.
    """
    if p < 1 or p % 2 == 0:
        raise ValueError(f"signed sums need an odd positive integer p, got {p}")
    return _variation_sum(x, float(p), t, n, signed=True,
                          chunk_level=chunk_level, max_level=max_level,
                          threads=threads)


def classify_regime(hurst: Hurst, p: PValue) -> Regime:
    """Compare p against 1/H: exact on rationals, float sign otherwise.

    A float p is an exact binary rational, so when H itself is exact the
    comparison p*H == 1 is decided without rounding.  With an inexact H the
    sign of p - 1/H in floats decides, which cannot recognize equality
    unless it holds bit-for-bit.
    """
    if hurst.exact is not None:
        q = Fraction(p) * hurst.exact
        if q == 1:
            return Regime.LINEAR
        return Regime.VANISHES if q > 1 else Regime.DIVERGES
    diff = float(p) - hurst.p_star
    if diff == 0.0:
        return Regime.LINEAR
    return Regime.VANISHES if diff > 0 else Regime.DIVERGES


def _even_p_star(hurst: Hurst) -> int:
    """1/H as an even integer, or ValueError."""
    if hurst.exact is not None:
        pe = 1 / hurst.exact
        if pe.denominator == 1 and pe.numerator % 2 == 0:
            return int(pe)
        raise ValueError(f"1/H = {pe} is not an even integer")
    ps = hurst.p_star
    if ps == round(ps) and round(ps) % 2 == 0:
        return int(round(ps))
    raise ValueError(f"1/H = {ps} is not an even integer")


def truncated_slope(hurst, n: int) -> float:
    """2**(1-p) * E[(sum_{m<n} lam**m Y_m)**p] for p = 1/H an even integer.

    The even moment of the finite symmetric sum is expanded level by level:
    appending the term c = lam**m maps the moment vector through
    E[(S + cY)**i] = sum over l with i-l even of C(i,l) E[S**l] c**(i-l).
    All terms are nonnegative, so the expansion is also monotone in n and
    bounded by the infinite-series moment.
    """
    h = Hurst.parse(hurst)
    if n < 1:
        raise ValueError("level must be >= 1")
    p = _even_p_star(h)
    bc = BernoulliConvolution.from_hurst(h)
    mom = [0.0] * (p + 1)
    mom[0] = 1.0
    for m in range(n):
        c = [float(bc.power(m)) ** e for e in range(p + 1)]
        new = [0.0] * (p + 1)
        new[0] = 1.0
        for i in range(2, p + 1, 2):
            new[i] = math.fsum(
                math.comb(i, l) * mom[l] * c[i - l] for l in range(0, i + 1, 2)
            )
        mom = new
    return math.ldexp(mom[p], 1 - p)


def predicted_slope(hurst, *, method: str = "auto", samples: int = 10 ** 6,
                    seed: int = 0, truncation: int = 64) -> SlopeEstimate:
    """Limit slope 2**(1-1/H) * E[|Z|**(1/H)].

    Exact via the even-moment recursion when 1/H is an even integer;
    otherwise a seeded Monte Carlo estimate with its standard error.
    """
    h = Hurst.parse(hurst)
    if method not in ("auto", "exact", "monte-carlo"):
        raise ValueError(f"unknown method {method!r}")
    if method != "monte-carlo":
        try:
            p = _even_p_star(h)
        except ValueError:
            if method == "exact":
                raise
        else:
            bc = BernoulliConvolution.from_hurst(h)
            return SlopeEstimate(
                math.ldexp(float(even_moment(bc, p)), 1 - p), None, "recursion"
            )
    bc = BernoulliConvolution.from_hurst(h)
    est = sample_abs_moment(bc, h.p_star, samples, seed=seed, truncation=truncation)
    scale = 2.0 ** (1.0 - h.p_star)
    return SlopeEstimate(scale * est.mean, scale * est.stderr, "monte-carlo")


def convergence_report(x: SignedTLFunction, p: PValue, t, n_max: int, *,
                       chunk_level: int = DEFAULT_CHUNK_LEVEL,
                       max_level: int = HARD_MAX_LEVEL, threads: int = 1,
                       samples: int = 10 ** 6, seed: int = 0) -> VariationReport:
    """V_n for n = 1..n_max plus regime classification and predicted limit."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    _check_level(n_max, min(max_level, HARD_MAX_LEVEL))
    regime = classify_regime(x.hurst, p)
    pf = float(p)
    levels = tuple(
        (n, vn(x, pf, t, n, chunk_level=chunk_level, max_level=max_level,
               threads=threads))
        for n in range(1, n_max + 1)
    )
    stderr = None
    if regime is Regime.LINEAR:
        slope = predicted_slope(x.hurst, samples=samples, seed=seed)
        limit = float(Fraction(t)) * slope.value
        stderr = None if slope.stderr is None else float(Fraction(t)) * slope.stderr
    elif regime is Regime.VANISHES:
        limit = 0.0
    else:
        limit = math.inf
    return VariationReport(x.hurst.value, pf, float(Fraction(t)), levels,
                           regime, limit, stderr)


def write_report_csv(stream: IO[str], report: VariationReport) -> None:
    stream.write("n,V_n,predicted_limit,regime\n")
    for n, v in report.levels:
        stream.write(f"{n},{v!r},{report.predicted_limit!r},{report.regime.value}\n")


def report_json_dict(report: VariationReport) -> dict:
    return {
        "H": report.h,
        "p": report.p,
        "t": report.t,
        "regime": report.regime.value,
        "predicted_limit": report.predicted_limit,
        "mc_stderr": report.mc_stderr,
        "levels": [[n, v] for n, v in report.levels],
    }


@dataclass(frozen=True)
class SlopePoint:
    h: Fraction
    value: float
    stderr: Optional[float]
    method: str


def slope_curve(points: int = 50, *, samples: int = 200_000, seed: int = 0,
                truncation: int = 64) -> list[SlopePoint]:
    """The limit slope as a function of H on the grid i/(points+2), i=1..points.

    The denominator points+2 keeps interior points only and, for the default
    50, places 1/4 and 1/2 (even 1/H, exact recursion values) on the grid;
    the remaining points are Monte Carlo with per-point derived seeds.
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    out = []
    for i in range(1, points + 1):
        h = Fraction(i, points + 2)
        est = predicted_slope(Hurst.parse(h), samples=samples, seed=seed + i,
                              truncation=truncation)
        out.append(SlopePoint(h, est.value, est.stderr, est.method))
    return out


def write_slope_curve_csv(stream: IO[str], curve: Sequence[SlopePoint]) -> None:
    stream.write("H,slope,stderr,method\n")
    for pt in curve:
        se = "" if pt.stderr is None else repr(pt.stderr)
        stream.write(f"{float(pt.h)!r},{pt.value!r},{se},{pt.method}\n")
