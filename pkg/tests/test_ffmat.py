import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pgcoh.ffmat import EchelonAccumulator, FpMatrix, kernel, left_kernel, rank, rref, solve


def brute_kernel(rows, p):
    cols = len(rows[0])
    out = []
    for x in itertools.product(range(p), repeat=cols):
        if all(sum(a * b for a, b in zip(r, x)) % p == 0 for r in rows):
            out.append(x)
    return out


def test_rref_examples():
    assert rref(FpMatrix.identity(2, 2))[0] == 2
    assert rref(FpMatrix.zeros(3, 3, 4))[0] == 0
    r, piv, red = rref(FpMatrix.from_rows(5, [[1, 2], [2, 4]]))
    assert r == 1 and piv == [0]
    assert red.tolist() == [[1, 2]]


def test_rref_empty():
    assert rref(FpMatrix.zeros(3, 0, 0))[0] == 0


def test_kernel_examples():
    assert kernel(FpMatrix.identity(2, 3)).shape[0] == 0
    assert kernel(FpMatrix.zeros(2, 2, 3)).shape[0] == 3
    # oracle: enumerate all 8 vectors
    rows = [[1, 1, 0], [0, 1, 1]]
    sols = [x for x in brute_kernel(rows, 2) if any(x)]
    assert sols == [(1, 1, 1)]
    assert kernel(FpMatrix.from_rows(2, rows)).tolist() == [[1, 1, 1]]


def test_solve_examples():
    assert solve(FpMatrix.identity(2, 2), [1, 0]).tolist() == [1, 0]
    assert solve(FpMatrix.zeros(3, 2, 2), [1, 0]) is None
    # oracle: exhaustive search over F_3^2
    m = [[1, 1], [0, 1]]
    hits = [x for x in itertools.product(range(3), repeat=2)
            if [(m[0][0] * x[0] + m[0][1] * x[1]) % 3, (m[1][0] * x[0] + m[1][1] * x[1]) % 3] == [0, 1]]
    assert hits == [(2, 1)]
    assert solve(FpMatrix.from_rows(3, m), [0, 1]).tolist() == [2, 1]


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve(FpMatrix.identity(3, 2), [1, 0, 0])


@st.composite
def matrices(draw):
    p = draw(st.sampled_from([2, 3, 5]))
    r = draw(st.integers(0, 30))
    c = draw(st.integers(1, 30))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    # low-rank products exercise dependent rows
    if draw(st.booleans()) and r and c:
        k = draw(st.integers(1, min(r, c)))
        a = rng.integers(0, p, (r, k)) @ rng.integers(0, p, (k, c))
    else:
        a = rng.integers(0, p, (r, c))
    return FpMatrix(p, a)


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_nullity(m):
    rk, piv, red = rref(m)
    ker = kernel(m)
    assert rk + ker.shape[0] == m.cols
    for v in ker:
        assert not np.any((m.data @ v) % m.p)
    # kernel vectors independent
    assert rank(FpMatrix(m.p, ker)) == ker.shape[0] if ker.size else True
    # rref rows span the same row space
    both = FpMatrix(m.p, np.vstack([m.data, red.data])) if red.rows else m
    assert rank(both) == rk


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_left_kernel(m):
    lk = left_kernel(m)
    rk = rref(m)[0]
    assert lk.shape[0] == m.rows - rk
    for v in lk:
        assert not np.any((v @ m.data) % m.p)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_incremental_matches_batch(m):
    acc = EchelonAccumulator(m.p, m.cols)
    for row in m.data:
        acc.add(row)
    assert acc.rank == rref(m)[0]
    acc2 = EchelonAccumulator(m.p, m.cols)
    acc2.add_rows(m.data)
    assert acc2.rank == acc.rank
    for row in m.data:
        assert acc.contains(row)


@settings(max_examples=100, deadline=None)
@given(matrices(), st.integers(0, 2**31))
def test_solve_property(m, seed):
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, m.p, m.cols)
    b = (m.data @ x0) % m.p
    x = solve(m, b)
    assert x is not None
    assert np.array_equal((m.data @ x) % m.p, b)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_coordinates(m):
    acc = EchelonAccumulator(m.p, m.cols, track=True)
    for row in m.data:
        acc.add(row)
    rng = np.random.default_rng(0)
    if m.rows == 0:
        return
    coef = rng.integers(0, m.p, m.rows)
    target = (coef @ m.data) % m.p
    co = acc.coordinates(target)
    assert co is not None
    rebuilt = np.zeros(m.cols, dtype=np.int64)
    for k, w in co.items():
        rebuilt = (rebuilt + w * m.data[k]) % m.p
    assert np.array_equal(rebuilt, target)
