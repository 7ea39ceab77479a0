from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from puritydist import BipartiteDims, compositions, purity_moment, purity_moments
from puritydist.moments import purity_moment_direct, schmidt_normalization


def test_compositions_small():
    assert list(compositions(2, 2)) == [(0, 2), (1, 1), (2, 0)]
    assert list(compositions(0, 3)) == [(0, 0, 0)]


@given(st.integers(0, 7), st.integers(1, 4))
def test_compositions_count_and_sum(n, p):
    cs = list(compositions(n, p))
    assert len(cs) == comb(n + p - 1, p - 1)
    assert all(sum(c) == n and len(c) == p for c in cs)
    assert cs == sorted(cs)
    assert len(set(cs)) == len(cs)


@pytest.mark.parametrize('dims,n,value', [
    ((2, 2), 1, Fraction(4, 5)), ((3, 3), 1, Fraction(3, 5)),
    ((4, 4), 1, Fraction(8, 17)), ((2, 2), 2, Fraction(23, 35))])
def test_known_values(dims, n, value):
    assert purity_moment(dims, n) == value


@pytest.mark.parametrize('p,q', [(2, 2), (2, 7), (3, 3), (3, 6), (4, 4),
                                 (4, 9)])
def test_mean_purity(p, q):
    # independent closed form <R> = (p + q)/(pq + 1)
    assert purity_moment(BipartiteDims(p, q), 1) == Fraction(p + q, p * q + 1)


@pytest.mark.parametrize('p,q', [(2, 2), (2, 5), (3, 3), (3, 5), (4, 4),
                                 (4, 6)])
def test_fast_matches_direct(p, q):
    dims = BipartiteDims(p, q)
    fast = purity_moments(dims, 8)
    assert fast == [purity_moment_direct(dims, n) for n in range(9)]


def test_zeroth_moment():
    for dims in [(2, 3), (3, 4), (4, 5)]:
        assert purity_moment(dims, 0) == 1


def test_moments_bounds_and_decrease():
    dims = BipartiteDims(3, 5)
    ms = purity_moments(dims, 20)
    for n, m in enumerate(ms):
        assert Fraction(1, 3 ** n) <= m <= 1
    assert all(a > b for a, b in zip(ms, ms[1:]))


def test_schmidt_normalization():
    assert schmidt_normalization(BipartiteDims(2, 2)) == 3
    # (pq-1)! / prod_j (q-j-1)! (p-j)!  =  7! / (3! 2! * 2! 1!)
    assert schmidt_normalization((2, 4)) == 210
