"""Exact moments of the purity of random bipartite pure states.

    <R^n> = p! (pq-1)! / (pq+2n-1)!
            * sum over compositions n_1 + ... + n_p = n of
              n!/(n_1! ... n_p!) * prod_i (q+2n_i-i)! / ((q-i)! i!)
              * prod_{i<j} (2n_i - i - 2n_j + j)

Two exact routes are provided.  :func:`purity_moment_direct` enumerates the
compositions literally.  :func:`purity_moments` evaluates all moments up to
``n_max`` at once: the product over ``i<j`` is a Vandermonde determinant in
``a_i = 2n_i - i``, so after expanding the determinant over permutations the
composition sum becomes a convolution of one-variable sequences.  The
routes agree exactly (checked in the test suite) and the second one is fast
enough for the hundreds of moments the 4 x q solver consumes.
"""

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .errors import DomainError
from .model import BipartiteDims

__all__ = ['compositions', 'purity_moment', 'purity_moment_direct',
           'purity_moments', 'schmidt_normalization']


@lru_cache(maxsize=None)
def _fact(n):
    return factorial(n)


def compositions(n, p):
    """Yield every tuple of ``p`` nonnegative integers summing to ``n``.

    Tuples come out in lexicographic order; there are ``C(n+p-1, p-1)``.
    """
    if n < 0 or p < 1:
        raise DomainError('need n >= 0 and p >= 1')
    if p == 1:
        yield (n,)
        return
    for first in range(n + 1):
        for rest in compositions(n - first, p - 1):
            yield (first,) + rest


def _dims(dims):
    return dims if isinstance(dims, BipartiteDims) else BipartiteDims(*dims)


def _prefactor(p, q, n):
    return Fraction(_fact(p) * _fact(p * q - 1), _fact(p * q + 2 * n - 1))


def purity_moment_direct(dims, n):
    """``<R^n>`` by literal enumeration of the compositions."""
    dims = _dims(dims)
    if n < 0:
        raise DomainError('moment order must be nonnegative')
    p, q = dims.p, dims.q
    total = Fraction(0)
    for parts in compositions(n, p):
        term = Fraction(_fact(n))
        for m in parts:
            term /= _fact(m)
        for i in range(1, p + 1):
            term *= Fraction(_fact(q + 2 * parts[i - 1] - i),
                             _fact(q - i) * _fact(i))
        for i in range(1, p + 1):
            for j in range(i + 1, p + 1):
                term *= 2 * parts[i - 1] - i - 2 * parts[j - 1] + j
        total += term
    return _prefactor(p, q, n) * total


def _perm_sign(perm):
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def _convolve(a, b, size):
    return [sum(a[k] * b[n - k] for k in range(n + 1)) for n in range(size)]


@lru_cache(maxsize=64)
def _moment_table(p, q, n_max):
    size = n_max + 1
    # seq[i][e][m] = (q+2m-i)!/m! * (2m-i)**e, with i 1-based
    seq = [[[(_fact(q + 2 * m - i) // _fact(m)) * (2 * m - i) ** e
             for m in range(size)] for e in range(p)]
           for i in range(1, p + 1)]
    sums = [0] * size
    # prod_{i<j}(a_i - a_j) = det[a_i ** (p - k)]
    for perm in itertools.permutations(range(p)):
        acc = seq[0][p - 1 - perm[0]]
        for i in range(1, p):
            acc = _convolve(acc, seq[i][p - 1 - perm[i]], size)
        sign = _perm_sign(perm)
        for n in range(size):
            sums[n] += sign * acc[n]
    const = 1
    for i in range(1, p + 1):
        const *= _fact(q - i) * _fact(i)
    return tuple(_prefactor(p, q, n) * Fraction(_fact(n) * sums[n], const)
                 for n in range(size))


def purity_moments(dims, n_max):
    """Exact ``<R^n>`` for ``n = 0 .. n_max`` as a list of Fractions."""
    dims = _dims(dims)
    if n_max < 0:
        raise DomainError('n_max must be nonnegative')
    return list(_moment_table(dims.p, dims.q, n_max))


def purity_moment(dims, n):
    """Exact ``<R^n>`` as a :class:`fractions.Fraction` in lowest terms."""
    if n < 0:
        raise DomainError('moment order must be nonnegative')
    return purity_moments(dims, n)[n]


def schmidt_normalization(dims):
    """Normalization constant of the joint Schmidt-coefficient density.

    ``(pq-1)! / prod_{j=0}^{p-1} (q-j-1)! (p-j)!`` as an exact Fraction.
    """
    dims = _dims(dims)
    p, q = dims.p, dims.q
    den = 1
    for j in range(p):
        den *= _fact(q - j - 1) * _fact(p - j)
    return Fraction(_fact(p * q - 1), den)

