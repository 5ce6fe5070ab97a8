import io
import struct
from fractions import Fraction

import numpy as np
import pytest

from takagi_lab.coeffs import ALL_PLUS, Explicit, Seeded
from takagi_lab.dyadic import (
    IncrementTable,
    column_enumeration_complete,
    grid_values,
    increment_table,
    iter_increment_chunks,
    iter_value_chunks,
    level0,
    refine,
    sign_matrix,
    write_increments_csv,
    write_raw,
    write_values_csv,
)
from takagi_lab.errors import LevelOverflowError
from takagi_lab.tl_function import Hurst, SignedTLFunction, classic, evaluate_truncated, oscillation_extremal


def seeded(hs, seed):
    return SignedTLFunction(Hurst.parse(hs), Seeded(seed))


def oracle_increments(x, n):
    """Direct branch-descent summation at the grid points; independent of
    the refinement recursion."""
    vals = [evaluate_truncated(x, n, Fraction(k, 1 << n)) for k in range((1 << n) + 1)]
    return np.diff(np.array(vals))


def test_level0_and_first_refine():
    x = classic("1/2")
    t0 = level0(x)
    assert t0.n == 0 and np.array_equal(t0.d, [0.0])
    t1 = refine(x, t0)
    assert np.array_equal(t1.d, [0.5, -0.5])


def test_refine_level2_all_plus():
    x = classic("1/2")
    t2 = refine(x, refine(x, level0(x)))
    expect = np.array([0.25 + 2 ** -1.5, 0.25 - 2 ** -1.5,
                       -0.25 + 2 ** -1.5, -0.25 - 2 ** -1.5])
    assert np.allclose(t2.d, expect, atol=1e-16)
    assert np.allclose(t2.d, oracle_increments(x, 2), atol=1e-15)


def test_refine_level2_half_negated():
    # differs from the all-plus table only in the second half
    xt = oscillation_extremal("1/2")
    t2 = increment_table(xt, 2)
    assert np.allclose(t2.d, oracle_increments(xt, 2), atol=1e-15)
    expect = np.array([0.25 + 2 ** -1.5, 0.25 - 2 ** -1.5,
                       -0.25 - 2 ** -1.5, -0.25 + 2 ** -1.5])
    assert np.allclose(t2.d, expect, atol=1e-16)
    x2 = increment_table(classic("1/2"), 2)
    assert np.array_equal(t2.d[:2], x2.d[:2])
    assert not np.array_equal(t2.d[2:], x2.d[2:])


def test_grid_values_examples():
    assert np.array_equal(grid_values(classic("1/2"), 1), [0.0, 0.5, 0.0])
    v2 = grid_values(classic("1/2"), 2)
    assert np.allclose(v2, [0.0, 0.25 + 2 ** -1.5, 0.5, 0.25 + 2 ** -1.5, 0.0],
                       atol=1e-16)
    # the half-negated source keeps only the generation-0 tent at level 1
    assert np.array_equal(grid_values(oscillation_extremal("2/3"), 1), [0.0, 0.5, 0.0])


@pytest.mark.parametrize("x", [classic("1/2"), seeded("1/4", 3), seeded("7/10", 12)])
def test_grid_agrees_with_direct_summation(x):
    n = 9
    v = grid_values(x, n)
    ks = [0, 1, 5, 100, 255, 256, 511, 512]
    for k in ks:
        assert v[k] == pytest.approx(
            evaluate_truncated(x, n, Fraction(k, 1 << n)), abs=1e-12
        )


@pytest.mark.parametrize("x", [classic("1/2"), seeded("1/3", 1), oscillation_extremal("4/5")])
def test_refinement_consistency_exact(x):
    prev = grid_values(x, 0)
    for n in range(1, 11):
        v = grid_values(x, n)
        assert np.array_equal(v[::2], prev)
        prev = v


def test_telescoping():
    # endpoint of the value recursion is exactly zero ...
    for x in (classic("1/2"), seeded("1/5", 9)):
        assert grid_values(x, 12)[-1] == 0.0
        # ... and summing the increment table telescopes within float residue
        d = increment_table(x, 12).d
        assert abs(np.sum(d)) <= (1 << 12) * 1e-15


def test_values_vs_increment_prefix_sums():
    x = seeded("2/5", 21)
    n = 10
    v = grid_values(x, n)
    prefix = np.concatenate([[0.0], np.cumsum(increment_table(x, n).d)])
    assert np.allclose(v, prefix, atol=1e-13)


def test_sign_matrix_block_structure():
    mat = sign_matrix(classic("1/2"), 2)
    assert np.array_equal(mat[1], [1, -1, 1, -1])
    assert np.array_equal(mat[0], [1, 1, -1, -1])
    assert np.array_equal(sign_matrix(classic("1/4"), 1), [[1, -1]])
    # all-plus row m: alternating blocks of length 2**(n-1-m) starting +1
    n = 6
    mat = sign_matrix(classic("9/10"), n)
    for m in range(n):
        block = 1 << (n - 1 - m)
        expect = np.tile(np.repeat([1, -1], block), 1 << m)
        assert np.array_equal(mat[m], expect)


@pytest.mark.parametrize("src", [ALL_PLUS, Seeded(0), Seeded(77),
                                 Explicit([[1], [-1, 1], [1, -1, -1, 1]])])
def test_column_enumeration(src):
    n = 3 if isinstance(src, Explicit) else 11
    x = SignedTLFunction(Hurst.parse("1/2"), src)
    assert column_enumeration_complete(x, n)
    mat = sign_matrix(x, n)
    cols = {tuple(mat[:, k]) for k in range(1 << n)}
    assert len(cols) == 1 << n


def test_streaming_matches_dense_bitwise():
    for x in (classic("1/2"), seeded("3/10", 5)):
        dense = increment_table(x, 12).d
        for chunk_level in (3, 7, 12, 20):
            got = np.concatenate(
                list(iter_increment_chunks(x, 12, chunk_level=chunk_level))
            )
            assert np.array_equal(dense, got)


def test_value_streaming_matches_dense_bitwise():
    x = seeded("5/8", 2)
    dense = grid_values(x, 11)
    got = np.concatenate(list(iter_value_chunks(x, 11, chunk_level=4)))
    assert got.size == dense.size
    assert np.array_equal(dense, got)


def test_level_guards():
    x = classic("1/2")
    with pytest.raises(LevelOverflowError):
        increment_table(x, 25)
    with pytest.raises(LevelOverflowError):
        grid_values(x, 31, max_level=31)
    with pytest.raises(LevelOverflowError):
        sign_matrix(x, 21)
    with pytest.raises(ValueError):
        increment_table(x, -1)
    with pytest.raises(ValueError):
        sign_matrix(x, 0)
    # refine past an explicit cap
    t = increment_table(x, 4)
    with pytest.raises(LevelOverflowError):
        refine(x, t, max_level=4)
    assert isinstance(refine(x, t), IncrementTable)


def test_csv_exports():
    x = classic("1/2")
    buf = io.StringIO()
    write_values_csv(buf, x, 1)
    assert buf.getvalue() == "k,t,value\n0,0.0,0.0\n1,0.5,0.5\n2,1.0,0.0\n"
    buf = io.StringIO()
    write_increments_csv(buf, x, 1)
    assert buf.getvalue() == "k,t,d\n0,0.0,0.5\n1,0.5,-0.5\n"


def test_raw_export_layout():
    x = seeded("1/2", 1)
    n = 5
    buf = io.BytesIO()
    write_raw(buf, x, n, what="increments")
    raw = buf.getvalue()
    (level,) = struct.unpack_from("<Q", raw)
    assert level == n
    data = np.frombuffer(raw[8:], dtype="<f8")
    assert np.array_equal(data, increment_table(x, n).d)

    buf = io.BytesIO()
    write_raw(buf, x, n, what="values")
    data = np.frombuffer(buf.getvalue()[8:], dtype="<f8")
    assert np.array_equal(data, grid_values(x, n))

    with pytest.raises(ValueError):
        write_raw(io.BytesIO(), x, n, what="slopes")
