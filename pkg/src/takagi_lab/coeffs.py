"""Sign sources theta[m, k] in {-1, +1}, addressed by (generation, offset).

A source defines one member of the signed function class.  Sources are
immutable, pure (repeated queries agree), and lazily addressable, so grid
kernels can pull whole generations or slices without materializing anything
up front.

Available kinds:

* ``AllPlus`` -- every sign +1 (the classic function).
* ``HalfNegated`` -- +1 on the first half of every generation, -1 on the
  second; its series attains the maximal uniform oscillation of the class.
* ``Seeded`` -- counter-based pseudorandom signs derived from
  (seed, m, k); random access, order-independent, reproducible across
  runs and thread schedules.
* ``Explicit`` -- caller-supplied rows, loadable from JSON, for
  adversarial sign patterns in tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._bits import GOLDEN, MASK64, STREAM, splitmix64, splitmix64_array
from .errors import MissingLevelError

__all__ = [
    "CoefficientSource",
    "AllPlus",
    "HalfNegated",
    "Seeded",
    "Explicit",
    "ALL_PLUS",
    "HALF_NEGATED",
    "explicit_from_json",
    "load_explicit",
]


class CoefficientSource:
    """Base class; concrete sources implement `_sign` and `_sign_range`."""

    def _sign(self, m: int, k: int) -> int:
        raise NotImplementedError

    def _sign_range(self, m: int, k0: int, k1: int) -> np.ndarray:
        return np.array([self._sign(m, k) for k in range(k0, k1)], dtype=np.int8)

    def get(self, m: int, k: int) -> int:
        """Sign at (m, k); +1 or -1.  Raises ValueError for invalid indices."""
        if m < 0:
            raise ValueError(f"generation must be >= 0, got {m}")
        if not 0 <= k < (1 << m):
            raise ValueError(f"offset {k} out of range for generation {m}")
        return self._sign(m, k)

    def signs(self, m: int, k0: int, k1: int) -> np.ndarray:
        """Contiguous slice of generation m as an int8 array of +-1."""
        if m < 0:
            raise ValueError(f"generation must be >= 0, got {m}")
        if not 0 <= k0 <= k1 <= (1 << m):
            raise ValueError(f"slice [{k0}, {k1}) out of range for generation {m}")
        return self._sign_range(m, k0, k1)

    def row(self, m: int) -> np.ndarray:
        """All 2**m signs of generation m."""
        return self.signs(m, 0, 1 << m)


@dataclass(frozen=True)
class AllPlus(CoefficientSource):
    def _sign(self, m: int, k: int) -> int:
        return 1

    def _sign_range(self, m: int, k0: int, k1: int) -> np.ndarray:
        return np.ones(k1 - k0, dtype=np.int8)


@dataclass(frozen=True)
class HalfNegated(CoefficientSource):
    """+1 for offsets below 2**(m-1), -1 above; generation 0 is +1."""

    def _sign(self, m: int, k: int) -> int:
        if m == 0:
            return 1
        return 1 if k < (1 << (m - 1)) else -1

    def _sign_range(self, m: int, k0: int, k1: int) -> np.ndarray:
        out = np.ones(k1 - k0, dtype=np.int8)
        if m > 0:
            half = 1 << (m - 1)
            if k1 > half:
                out[max(0, half - k0):] = -1
        return out


@dataclass(frozen=True)
class Seeded(CoefficientSource):
    """Counter-based pseudorandom signs: sign = top bit of
    splitmix64(base(m) ^ k*STREAM) with base(m) = splitmix64(seed ^ (m+1)*GOLDEN).

    No state, no stream position: any (m, k) can be queried in any order
    and from any thread with identical results.
    """

    seed: int

    def _base(self, m: int) -> int:
        return splitmix64((self.seed & MASK64) ^ (((m + 1) * GOLDEN) & MASK64))

    def _sign(self, m: int, k: int) -> int:
        z = splitmix64(self._base(m) ^ ((k * STREAM) & MASK64))
        return 1 - 2 * (z >> 63)

    def _sign_range(self, m: int, k0: int, k1: int) -> np.ndarray:
        if k1 > (1 << 62):
            return super()._sign_range(m, k0, k1)
        ks = np.arange(k0, k1, dtype=np.uint64)
        z = splitmix64_array(np.uint64(self._base(m)) ^ (ks * np.uint64(STREAM)))
        return (1 - ((z >> np.uint64(63)).astype(np.int8) << 1)).astype(np.int8)


class Explicit(CoefficientSource):
    """Caller-supplied sign rows; row m must hold exactly 2**m entries.

    Queries beyond the supplied generations raise MissingLevelError.
    """

    def __init__(self, rows) -> None:
        clean = []
        for m, row in enumerate(rows):
            arr = np.asarray(row, dtype=np.int64)
            if arr.shape != (1 << m,):
                raise ValueError(
                    f"row {m} must have {1 << m} entries, got {arr.shape}"
                )
            if not np.all(np.abs(arr) == 1):
                raise ValueError(f"row {m} contains entries other than +-1")
            clean.append(arr.astype(np.int8))
        self.rows = tuple(clean)

    @property
    def levels(self) -> int:
        return len(self.rows)

    def _check(self, m: int) -> None:
        if m >= len(self.rows):
            raise MissingLevelError(
                f"generation {m} not supplied (have {len(self.rows)} rows)"
            )

    def _sign(self, m: int, k: int) -> int:
        self._check(m)
        return int(self.rows[m][k])

    def _sign_range(self, m: int, k0: int, k1: int) -> np.ndarray:
        self._check(m)
        return self.rows[m][k0:k1]


ALL_PLUS = AllPlus()
HALF_NEGATED = HalfNegated()


def explicit_from_json(text: str) -> Explicit:
    """Parse an Explicit source from a JSON array of arrays of +-1."""
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON array of sign rows")
    return Explicit(data)


def load_explicit(path: str | Path) -> Explicit:
    return explicit_from_json(Path(path).read_text(encoding="utf-8"))
