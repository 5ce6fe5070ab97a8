"""Moments of the symmetric infinite Bernoulli convolution.

Z is the law of sum_{m>=0} lam**m * Y_m for i.i.d. fair signs Y_m and
0 < lam < 1; for a function with Hurst index H the relevant parameter is
lam = 2**(H-1).  Three moment engines live here:

* ``even_moment`` -- the self-similarity Z =(d)= Y + lam*Z' gives the
  recursion  E[Z**p] * (1 - lam**p) = sum_{j even, j<p} C(p,j) lam**j E[Z**j],
  whose terms are all nonnegative (no cancellation).  Exact rationals when
  lam is rational; otherwise floats, with powers of lam taken as exact
  powers of two whenever the exponent is an integer.  This engine is the
  ground truth the variation slope is built on.

* ``normalized_even_moment`` -- closed form via Bernoulli numbers and
  integer partitions.  NOTE the normalization: the series it evaluates is
  the moment of W = sum (1-lam) * lam**m * Y_m, the convolution rescaled to
  [-1, 1]; divide by (1-lam)**p to recover E[Z**p].  (Desk check at p=2:
  the formula collapses to (1-lam)/(1+lam) = (1-lam)**2 * E[Z**2].)  The
  partition sum alternates and cancels badly in binary64 for p >= 8, so it
  is evaluated with exact rational prefactors and 60-digit arithmetic for
  the irrational powers, converting to float only at the boundary.

* ``sample_abs_moment`` -- seeded, counter-based Monte Carlo for |Z|**p at
  arbitrary real p >= 0.  Sample i draws its signs from word-sized counter
  hashes of (seed, word, i), so results are independent of evaluation
  order and partitioning across workers.

Bernoulli numbers use the standard recurrence sum_j C(m+1, j) B_j = 0,
i.e. the "first" convention with B_1 = -1/2; only even-index values enter
the closed form and those agree across conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np
from mpmath import mp, mpf

from ._bits import GOLDEN, MASK64, STREAM, splitmix64, splitmix64_array
from .errors import GuardExceededError
from .tl_function import Hurst

__all__ = [
    "BernoulliConvolution",
    "even_moment",
    "signed_moment",
    "normalized_even_moment",
    "bernoulli_numbers",
    "partitions",
    "MomentEstimate",
    "sample_abs_moment",
    "MAX_BERNOULLI_INDEX",
    "MAX_PARTITION_SIZE",
]

MAX_BERNOULLI_INDEX = 64
MAX_PARTITION_SIZE = 40
_NORMALIZED_DPS = 60

Number = Union[float, Fraction]


@dataclass(frozen=True)
class BernoulliConvolution:
    """Parameter lam in (0, 1); optionally its exact base-2 exponent.

    When lam = 2**e with rational e (the Hurst case e = H - 1), integer
    multiples of e give exact powers of two: power(j) then returns the
    correctly scaled float with no compounding of rounding errors, e.g.
    lam = 2**(-1/2) has power(2) == 0.5 exactly.
    """

    lam: Number
    log2_lam: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if not 0 < float(self.lam) < 1:
            raise ValueError(f"lam must lie in (0, 1), got {self.lam}")

    @classmethod
    def from_hurst(cls, hurst) -> "BernoulliConvolution":
        h = Hurst.parse(hurst)
        return cls(h.lam, h.log2_lam)

    def power(self, j: int) -> Number:
        """lam**j, exact where the representation allows."""
        if j == 0:
            return Fraction(1) if isinstance(self.lam, Fraction) else 1.0
        if isinstance(self.lam, Fraction):
            return self.lam ** j
        if self.log2_lam is not None:
            e = self.log2_lam * j
            if e.denominator == 1:
                return math.ldexp(1.0, e.numerator)
            return 2.0 ** float(e)
        return float(self.lam) ** j


def even_moment(bc: BernoulliConvolution, p: int) -> Number:
    """E[Z**p] for even p >= 2 via the self-similarity recursion.

    Returns a Fraction for rational lam, a float otherwise.  Odd moments
    vanish by symmetry and are rejected here; use signed_moment for the
    trivial path.
    """
    if p < 2 or p % 2 != 0:
        raise ValueError(f"even_moment needs an even p >= 2, got {p}")
    one: Number = Fraction(1) if isinstance(bc.lam, Fraction) else 1.0
    moments = {0: one}
    for q in range(2, p + 1, 2):
        acc = moments[0] * bc.power(0)  # j = 0 term, C(q,0) = 1
        for j in range(2, q, 2):
            acc += math.comb(q, j) * bc.power(j) * moments[j]
        moments[q] = acc / (one - bc.power(q))
    return moments[p]


def signed_moment(bc: BernoulliConvolution, p: int) -> Number:
    """E[Z**p] for any integer p >= 0; odd orders are exactly zero."""
    if p < 0:
        raise ValueError(f"moment order must be >= 0, got {p}")
    zero_one = isinstance(bc.lam, Fraction)
    if p == 0:
        return Fraction(1) if zero_one else 1.0
    if p % 2 == 1:
        return Fraction(0) if zero_one else 0.0
    return even_moment(bc, p)


def bernoulli_numbers(count: int) -> list[Fraction]:
    """B_0 .. B_count as exact Fractions (B_1 = -1/2 convention)."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count > MAX_BERNOULLI_INDEX:
        raise GuardExceededError(
            f"count {count} exceeds guard {MAX_BERNOULLI_INDEX}"
        )
    out = [Fraction(1)]
    for m in range(1, count + 1):
        s = sum(Fraction(math.comb(m + 1, j)) * out[j] for j in range(m))
        out.append(-s / (m + 1))
    return out


def partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Multiplicity vectors (n_1, ..., n_n) with sum k*n_k = n.

    Yields each vector exactly once, in ascending lexicographic order.
    """
    if n < 1:
        raise ValueError("partition size must be >= 1")
    if n > MAX_PARTITION_SIZE:
        raise GuardExceededError(f"n {n} exceeds guard {MAX_PARTITION_SIZE}")

    def rec(pos: int, remaining: int):
        if pos == n:
            if remaining == 0:
                yield (0,)
            elif remaining == n:
                yield (1,)
            return
        for c in range(remaining // pos + 1):
            for rest in rec(pos + 1, remaining - pos * c):
                yield (c,) + rest

    if n == 1:
        yield (1,)
        return
    yield from rec(1, n)


def normalized_even_moment(hurst, p: int) -> float:
    """Closed-form even moment of the NORMALIZED convolution (see module
    docstring) for lam = 2**(H-1):

        (-1)**n * sum over partitions (n_1..n_n) of n = p/2 of
        (2n)!/(n_1! ... n_n!) * prod_k [ a_k * (1-lam)**(2k) / (1-lam**(2k)) ]**n_k

    with exact rational a_k = B_{2k} * (-1)**k * 2**(2k) * (2**(2k)-1) / ((2k)! * 2k).
    Divide the result by (1-lam)**p to compare against even_moment.
    """
    if p < 2 or p % 2 != 0:
        raise ValueError(f"normalized_even_moment needs an even p >= 2, got {p}")
    n = p // 2
    if n > 20:
        raise GuardExceededError(f"p/2 = {n} exceeds guard 20")
    h = Hurst.parse(hurst)
    bern = bernoulli_numbers(p)
    with mp.workdps(_NORMALIZED_DPS):
        e = h.log2_lam
        lam = mp.power(2, mpf(e.numerator) / mpf(e.denominator))
        one_minus = 1 - lam
        factors = []
        for k in range(1, n + 1):
            a_k = (
                bern[2 * k]
                * Fraction((-1) ** k * (1 << (2 * k)) * ((1 << (2 * k)) - 1))
                / (math.factorial(2 * k) * 2 * k)
            )
            ratio = one_minus ** (2 * k) / (1 - lam ** (2 * k))
            factors.append(mpf(a_k.numerator) / mpf(a_k.denominator) * ratio)
        total = mpf(0)
        fact2n = math.factorial(2 * n)
        for mult in partitions(n):
            coef = fact2n
            for nk in mult:
                coef //= math.factorial(nk)
            term = mpf(coef)
            for k, nk in enumerate(mult, start=1):
                if nk:
                    term *= factors[k - 1] ** nk
            total += term
        return float((-1) ** n * total)


@dataclass(frozen=True)
class MomentEstimate:
    """Monte Carlo estimate of E[|Z|**p] with its uncertainty metadata.

    bias_bound is the worst-case effect of truncating the series at
    `truncation` terms: with tail T = lam**truncation/(1-lam) and
    M = 1/(1-lam), it is p*T*M**(p-1) for p >= 1 and T**p for 0 < p < 1.
    """

    mean: float
    stderr: float
    p: float
    samples: int
    truncation: int
    seed: int
    bias_bound: float


def sample_abs_moment(bc: BernoulliConvolution, p: float, samples: int,
                      seed: int = 0, truncation: int = 64) -> MomentEstimate:
    """Sample mean and standard error of |sum_{m<truncation} lam**m Y_m|**p."""
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if truncation < 1:
        raise ValueError("truncation must be >= 1")
    idx = np.arange(samples, dtype=np.uint64)
    total = np.zeros(samples)
    for w in range(-(-truncation // 64)):
        base = splitmix64((seed & MASK64) ^ (((w + 1) * GOLDEN) & MASK64))
        words = splitmix64_array(np.uint64(base) ^ (idx * np.uint64(STREAM)))
        for b in range(min(64, truncation - 64 * w)):
            bit = ((words >> np.uint64(b)) & np.uint64(1)).astype(np.float64)
            total += float(bc.power(64 * w + b)) * (1.0 - 2.0 * bit)
    vals = np.abs(total) ** p
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1)) / math.sqrt(samples) if samples > 1 else 0.0
    lam = float(bc.lam)
    tail = lam ** truncation / (1.0 - lam)
    zmax = 1.0 / (1.0 - lam)
    if p == 0:
        bias = 0.0
    elif p < 1:
        bias = tail ** p
    else:
        bias = p * tail * zmax ** (p - 1.0)
    return MomentEstimate(mean, stderr, float(p), samples, truncation, seed, bias)
