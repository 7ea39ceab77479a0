"""Exact purity densities for 2 x q, 3 x 3, 3 x q and 4 x 4 bipartitions.

Coefficients are assembled in 40-digit arithmetic (mpmath), like terms are
merged, and only then rounded to double-double pairs (see :class:`Term`).
"""

import warnings
from collections import defaultdict
from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np

from .basis import BasisFunction, BasisTag, ONE, chi_values
from .errors import DomainError
from .model import (BipartiteDims, Piece, PiecewisePdf, Term,
                    rounding_error_bound)

__all__ = ['pdf_2xq', 'pdf_3x3', 'pdf_3xq', 'pdf_4x4', 'chi',
           'Q1_COEFFS', 'Q2_COEFFS', 'ROUNDING_WARN']

_DPS = 40
# absolute rounding bound above which a closed form warns on construction
ROUNDING_WARN = 1e-8

SQRT_6R_MINUS_3 = BasisFunction(BasisTag.SQRT_6R_MINUS_3)
ARCCOS_INV = BasisFunction(BasisTag.ARCCOS_INV_SQRT_6R_MINUS_2)
ARCCOS_RATIO = BasisFunction(BasisTag.ARCCOS_R_OVER_3R_MINUS_1)

# Integer coefficients (ascending powers) of the two degree-6 polynomials of
# the 4 x 4 density, before the common factor 175/(1944 sqrt 3).
_Q1_INNER = (1657, 277731, -2190321, 6208416, -7386066, 2913408)
Q2_COEFFS = (-159241, 2178306, -11709126, 30254796, -34540506, 4864860,
             14594580)
# (1 - x) * inner
Q1_COEFFS = tuple(
    (_Q1_INNER[i] if i < len(_Q1_INNER) else 0)
    - (_Q1_INNER[i - 1] if i >= 1 else 0)
    for i in range(len(_Q1_INNER) + 1))


class _TermCollector:
    """Accumulates high-precision coefficients keyed by monomial and basis."""

    def __init__(self):
        self._acc = defaultdict(lambda: mpmath.mpf(0))

    def add(self, coeff, power, variable, basis=ONE):
        self._acc[(power, variable, basis)] += coeff

    def terms(self):
        out = []
        for (power, variable, basis), c in sorted(
                self._acc.items(),
                key=lambda kv: (kv[0][2].name, kv[0][1], kv[0][0])):
            if c != 0:
                out.append(Term.from_value(c, power, variable, basis))
        return out


def _mpq(frac):
    return mpmath.mpf(frac.numerator) / frac.denominator


def pdf_2xq(q):
    """Density of the purity for a 2 x q system.

    ``C (1-R)**(q-2) sqrt(2R-1)`` on ``[1/2, 1]`` with
    ``C = (2q-1)! / (2**(q-1) (q-1)! (q-2)!)``.  Written in ``r = sqrt(R-1/2)``
    so that ``sqrt(2R-1) = sqrt(2) r`` and ``1-R = 1/2 - r**2``.
    """
    if int(q) != q or q < 2:
        raise DomainError('pdf_2xq needs an integer q >= 2')
    q = int(q)
    dims = BipartiteDims(2, q)
    with mpmath.workdps(_DPS):
        c = _mpq(Fraction(factorial(2 * q - 1),
                          2 ** (q - 1) * factorial(q - 1) * factorial(q - 2)))
        c *= mpmath.sqrt(2)
        col = _TermCollector()
        m = q - 2
        for k in range(m + 1):
            col.add(c * comb(m, k) * mpmath.mpf(2) ** (k - m) * (-1) ** k,
                    2 * k + 1, 'r')
        terms = col.terms()
    return PiecewisePdf(dims, [Piece(0.5, 1.0, terms)],
                        label='closed form 2xq (q=%d)' % q)


def pdf_3x3():
    """Density of the purity for a 3 x 3 system (two branches)."""
    with mpmath.workdps(_DPS):
        a = 70 * mpmath.sqrt(3)
        low = [Term.from_value(a * 2 * mpmath.pi, 6, 'r')]
        col = _TermCollector()
        col.add(a * 6 * mpmath.pi / 3, 6, 'r')
        col.add(-a * 6, 6, 'r', ARCCOS_INV)
        # (R - 1)(R - 5/9) = R^2 - 14/9 R + 5/9
        for power, c in ((2, 1), (1, Fraction(-14, 9)), (0, Fraction(5, 9))):
            col.add(a * _mpq(Fraction(c)), power, 'R', SQRT_6R_MINUS_3)
        high = col.terms()
    return PiecewisePdf(BipartiteDims(3, 3),
                        [Piece(1 / 3, 0.5, low), Piece(0.5, 1.0, high)],
                        label='closed form 3x3')


def _twice_index(j):
    try:
        tj = Fraction(j) * 2
    except (TypeError, ValueError):
        raise DomainError('chi index must be a half-integer') from None
    if tj.denominator != 1:
        raise DomainError('chi index must be an integer or half-integer')
    if tj < 0:
        raise DomainError('chi index must be nonnegative')
    return int(tj)


def chi(j, phi):
    """``chi_j(phi)`` for ``j`` in ``{0, 1/2, 1, 3/2, ...}``.

    A vanishing denominator (``j = 0`` or ``j = 1``) uses the limit
    ``sin(m phi)/m -> phi``.
    """
    tj = _twice_index(j)
    val = chi_values(tj, np.asarray(phi, dtype=float))
    return float(val) if np.ndim(val) == 0 else val


def _chi_at_pi_over_3(twice_j):
    # sin(m pi/3) via sinpi is exactly zero when 3 | m
    def term(m):
        if m == 0:
            return mpmath.pi / 3
        return mpmath.sinpi(mpmath.mpf(m) / 3) / m
    six_j = 3 * twice_j
    return term(six_j - 6) - 2 * term(six_j) + term(six_j + 6)


def pdf_3xq(q):
    """Density of the purity for a 3 x q system, any ``q >= 3``.

    Double sum over ``k = 0..d`` and ``j = 0..floor(k/2)`` with ``d = q-3``.
    In the radial variable ``r = sqrt(R - 1/3)`` each ``k`` contributes
    ``((2/9 - r**2)/6)**(d-k) * r**(3k+6)`` times a combination of
    ``chi_J(phi) - chi_J(pi/3)`` with ``J = j + (k mod 2)/2``.
    """
    if int(q) != q or q < 3:
        raise DomainError('pdf_3xq needs an integer q >= 3')
    q = int(q)
    d = q - 3
    with mpmath.workdps(_DPS):
        pref = _mpq(Fraction(factorial(3 * q - 1),
                             factorial(q - 1) * factorial(q - 2)
                             * factorial(q - 3)))
        pref /= 16 * mpmath.sqrt(3)
        ratio = -1 / (6 * mpmath.sqrt(6))
        low, high = _TermCollector(), _TermCollector()
        for k in range(d + 1):
            kbar = k % 2
            base = pref * comb(d, k) * ratio ** k
            # inner sum: list of (weight, 2J)
            inner = []
            for j in range(k // 2 + 1):
                w = mpmath.mpf(comb(k, k // 2 - j))
                if j == 0 and kbar == 0:
                    w /= 2
                inner.append((w, 2 * j + kbar))
            e = d - k
            for i in range(e + 1):
                c = (base * comb(e, i) * (mpmath.mpf(2) / 9) ** (e - i)
                     * (-1) ** i / mpmath.mpf(6) ** e)
                power = 3 * (k + 2) + 2 * i
                for w, tj in inner:
                    shift = _chi_at_pi_over_3(tj)
                    if shift != 0:
                        low.add(-c * w * shift, power, 'r')
                        high.add(-c * w * shift, power, 'r')
                    high.add(c * w, power, 'r', BasisFunction(BasisTag.CHI, tj))
        pieces = [Piece(1 / 3, 0.5, low.terms()),
                  Piece(0.5, 1.0, high.terms())]
    pdf = PiecewisePdf(BipartiteDims(3, q), pieces,
                       label='closed form 3xq (q=%d)' % q)
    bound = rounding_error_bound(pdf)
    pdf.meta['rounding_error_bound'] = bound
    if bound > ROUNDING_WARN:
        warnings.warn('3x%d closed form: cancellation limits the absolute '
                      'accuracy of evaluation to about %.1e' % (q, bound),
                      RuntimeWarning, stacklevel=2)
    return pdf


def pdf_4x4():
    """Density of the purity for a 4 x 4 system (three branches)."""
    with mpmath.workdps(_DPS):
        pi = mpmath.pi
        k = mpmath.mpf(175) / (1944 * mpmath.sqrt(3))
        # (4R-1)**(13/2) = 2**13 r**13
        c13 = mpmath.mpf(1575) / 16 * 2 ** 13
        low = [Term.from_value(c13 * pi, 13, 'r')]

        mid = _TermCollector()
        for i, a in enumerate(Q2_COEFFS):
            mid.add(pi / 3 * k * a, i, 'R')
        mid.add(-c13 * pi, 13, 'r')

        high = _TermCollector()
        for i, a in enumerate(Q1_COEFFS):
            high.add(k * a, i, 'R', SQRT_6R_MINUS_3)
        for i, a in enumerate(Q2_COEFFS):
            high.add(pi / 3 * k * a, i, 'R')
            high.add(-k * a, i, 'R', ARCCOS_INV)
        c_tail = 3 * c13
        high.add(-c_tail * pi / 3, 13, 'r')
        high.add(c_tail, 13, 'r', ARCCOS_RATIO)
        pieces = [Piece(0.25, 1 / 3, low), Piece(1 / 3, 0.5, mid.terms()),
                  Piece(0.5, 1.0, high.terms())]
    return PiecewisePdf(BipartiteDims(4, 4), pieces, label='closed form 4x4')
