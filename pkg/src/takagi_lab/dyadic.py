"""Exact streaming kernels on dyadic grids.

Level-n state is the table of 2**n increments d[k] = x((k+1)/2**n) - x(k/2**n).
Refinement to level n+1 splits each cell: the old slope halves exactly and the
generation-n tent adds +-2**(-n*H-1):

    d'[2k]   = d[k]/2 + theta[n,k] * 2**(-n*H-1)
    d'[2k+1] = d[k]/2 - theta[n,k] * 2**(-n*H-1)

Grid values are the prefix sums of the increment table with 0 prepended; they
are produced by the equivalent midpoint form (new value = cell midpoint of the
old values + displacement), which is the same prefix sum evaluated with exact
dyadic regrouping: restriction to the coarser grid and the zero endpoint come
out bitwise exact instead of accumulating cumsum roundoff.

Streaming: increments of the subtree below a level-b cell depend only on that
cell's increment and the subtree's signs, so tables beyond the dense limit are
produced chunk by chunk in O(chunk) memory.  Chunked and dense paths run the
identical elementwise operations and agree bitwise.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import IO, Iterator

import numpy as np

from .errors import LevelOverflowError
from .tl_function import Hurst, SignedTLFunction

__all__ = [
    "HARD_MAX_LEVEL",
    "DENSE_MAX_LEVEL",
    "DEFAULT_CHUNK_LEVEL",
    "SIGN_MATRIX_MAX_LEVEL",
    "IncrementTable",
    "displacement",
    "level0",
    "refine",
    "increment_table",
    "iter_increment_chunks",
    "subtree_increments",
    "grid_values",
    "iter_value_chunks",
    "sign_matrix",
    "column_enumeration_complete",
    "write_increments_csv",
    "write_values_csv",
    "write_raw",
]

HARD_MAX_LEVEL = 30          # 2**30 increments ~ 8 GiB dense; never exceeded
DENSE_MAX_LEVEL = 24         # default guard for materializing whole tables
DEFAULT_CHUNK_LEVEL = 20     # streaming chunk size 2**20
SIGN_MATRIX_MAX_LEVEL = 20   # sign matrices are test-scale only


def _check_level(n: int, limit: int, what: str = "level") -> None:
    if n < 0:
        raise ValueError(f"{what} must be >= 0, got {n}")
    if n > limit:
        raise LevelOverflowError(f"{what} {n} exceeds maximum {limit}")


@dataclass(frozen=True)
class IncrementTable:
    """Level n plus the 2**n exact dyadic increments of x."""

    n: int
    d: np.ndarray


def displacement(hurst: Hurst, m: int) -> float:
    """Half-height of the weighted generation-m tent: 2**(-m*H-1)."""
    return 2.0 ** (-m * hurst.value - 1.0)


def level0(x: SignedTLFunction) -> IncrementTable:
    return IncrementTable(0, np.zeros(1))


def _refine_step(d: np.ndarray, theta: np.ndarray, c: float) -> np.ndarray:
    half = 0.5 * d
    disp = theta * c
    out = np.empty(2 * d.size, dtype=np.float64)
    out[0::2] = half + disp
    out[1::2] = half - disp
    return out


def refine(x: SignedTLFunction, table: IncrementTable, *,
           max_level: int = HARD_MAX_LEVEL) -> IncrementTable:
    """Increment table at level n+1 from the table at level n."""
    _check_level(table.n + 1, min(max_level, HARD_MAX_LEVEL))
    theta = x.coeffs.row(table.n)
    return IncrementTable(
        table.n + 1, _refine_step(table.d, theta, displacement(x.hurst, table.n))
    )


def increment_table(x: SignedTLFunction, n: int, *,
                    max_level: int = DENSE_MAX_LEVEL) -> IncrementTable:
    """Dense table at level n, built by refining from level 0."""
    _check_level(n, min(max_level, HARD_MAX_LEVEL))
    table = level0(x)
    for _ in range(n):
        table = refine(x, table)
    return table


def subtree_increments(x: SignedTLFunction, base_value: float, base_level: int,
                       j: int, depth: int) -> np.ndarray:
    """Level-(base_level+depth) increments of the subtree below cell j."""
    d = np.array([base_value], dtype=np.float64)
    for i in range(depth):
        m = base_level + i
        theta = x.coeffs.signs(m, j << i, (j + 1) << i)
        d = _refine_step(d, theta, displacement(x.hurst, m))
    return d


def iter_increment_chunks(x: SignedTLFunction, n: int, *,
                          chunk_level: int = DEFAULT_CHUNK_LEVEL,
                          max_level: int = HARD_MAX_LEVEL) -> Iterator[np.ndarray]:
    """Level-n increments in k-order, in chunks of at most 2**chunk_level."""
    _check_level(n, min(max_level, HARD_MAX_LEVEL))
    if n <= chunk_level:
        yield increment_table(x, n, max_level=max_level).d
        return
    base_level = n - chunk_level
    base = increment_table(x, base_level).d
    for j in range(base.size):
        yield subtree_increments(x, float(base[j]), base_level, j, chunk_level)


def grid_values(x: SignedTLFunction, n: int, *,
                max_level: int = DENSE_MAX_LEVEL) -> np.ndarray:
    """Exact values of x at the 2**n + 1 dyadic points of level n."""
    _check_level(n, min(max_level, HARD_MAX_LEVEL))
    v = np.zeros(2)
    for m in range(n):
        theta = x.coeffs.row(m)
        c = displacement(x.hurst, m)
        nxt = np.empty(2 * v.size - 1, dtype=np.float64)
        nxt[0::2] = v
        nxt[1::2] = 0.5 * (v[:-1] + v[1:]) + theta * c
        v = nxt
    return v


def iter_value_chunks(x: SignedTLFunction, n: int, *,
                      chunk_level: int = DEFAULT_CHUNK_LEVEL,
                      max_level: int = HARD_MAX_LEVEL) -> Iterator[np.ndarray]:
    """Grid values in order, chunked; concatenation equals grid_values."""
    _check_level(n, min(max_level, HARD_MAX_LEVEL))
    if n <= chunk_level:
        yield grid_values(x, n, max_level=max_level)
        return
    base_level = n - chunk_level
    vb = grid_values(x, base_level)
    last = vb.size - 2
    for j in range(vb.size - 1):
        w = vb[j:j + 2].copy()
        for i in range(chunk_level):
            m = base_level + i
            theta = x.coeffs.signs(m, j << i, (j + 1) << i)
            c = displacement(x.hurst, m)
            nxt = np.empty(2 * w.size - 1, dtype=np.float64)
            nxt[0::2] = w
            nxt[1::2] = 0.5 * (w[:-1] + w[1:]) + theta * c
            w = nxt
        yield w if j == last else w[:-1]


def sign_matrix(x: SignedTLFunction, n: int, *,
                max_level: int = SIGN_MATRIX_MAX_LEVEL) -> np.ndarray:
    """Signs sigma[m, k] of the generation-m slope on level-n cell k.

    Row m repeats each theta[m, .] over its 2**(n-m) cells and flips the
    second half of every tent: blocks of length 2**(n-1-m) alternating in
    sign.  For the all-plus source row m is exactly that alternating block
    pattern starting with +1.
    """
    if n < 1:
        raise ValueError("sign matrix needs level >= 1")
    _check_level(n, min(max_level, SIGN_MATRIX_MAX_LEVEL))
    mat = np.empty((n, 1 << n), dtype=np.int8)
    updown = np.array([1, -1], dtype=np.int8)
    for m in range(n):
        theta = np.repeat(x.coeffs.row(m), 1 << (n - m))
        hat = np.tile(np.repeat(updown, 1 << (n - 1 - m)), 1 << m)
        mat[m] = theta * hat
    return mat


def column_enumeration_complete(x: SignedTLFunction, n: int) -> bool:
    """True iff the sign-matrix columns are exactly the 2**n sign vectors."""
    mat = sign_matrix(x, n)
    codes = np.zeros(1 << n, dtype=np.int64)
    for m in range(n):
        codes = (codes << 1) | ((1 - mat[m].astype(np.int64)) >> 1)
    return np.unique(codes).size == (1 << n)


# ---------------------------------------------------------------------------
# exports: CSV (k, t, value|d) and raw little-endian float64 with a level header


def write_increments_csv(stream: IO[str], x: SignedTLFunction, n: int, *,
                         chunk_level: int = DEFAULT_CHUNK_LEVEL,
                         max_level: int = HARD_MAX_LEVEL) -> None:
    stream.write("k,t,d\n")
    k = 0
    scale = 2.0 ** (-n)
    for chunk in iter_increment_chunks(x, n, chunk_level=chunk_level, max_level=max_level):
        for val in chunk.tolist():
            stream.write(f"{k},{k * scale!r},{val!r}\n")
            k += 1


def write_values_csv(stream: IO[str], x: SignedTLFunction, n: int, *,
                     chunk_level: int = DEFAULT_CHUNK_LEVEL,
                     max_level: int = HARD_MAX_LEVEL) -> None:
    stream.write("k,t,value\n")
    k = 0
    scale = 2.0 ** (-n)
    for chunk in iter_value_chunks(x, n, chunk_level=chunk_level, max_level=max_level):
        for val in chunk.tolist():
            stream.write(f"{k},{k * scale!r},{val!r}\n")
            k += 1


def write_raw(stream: IO[bytes], x: SignedTLFunction, n: int, *,
              what: str = "increments",
              chunk_level: int = DEFAULT_CHUNK_LEVEL,
              max_level: int = HARD_MAX_LEVEL) -> None:
    """8-byte little-endian level header followed by float64 LE payload."""
    if what not in ("increments", "values"):
        raise ValueError(f"unknown payload kind {what!r}")
    stream.write(struct.pack("<Q", n))
    chunks = (iter_increment_chunks if what == "increments" else iter_value_chunks)(
        x, n, chunk_level=chunk_level, max_level=max_level
    )
    for chunk in chunks:
        stream.write(chunk.astype("<f8").tobytes())
