"""Registry of the special functions that multiply monomials in a density.

Every basis function is evaluated as a function of the purity ``R``.  The
three ``*_4R2_*`` entries are naturally written in terms of the radial
variable ``r = sqrt(R - 1/4)`` of the four-dimensional case, so they are
rewritten here with ``r**2 = R - 1/4``.

Evaluation follows the dtype of the argument, so ``np.longdouble`` arrays
give extended-precision values.  Arguments that drift just outside a
function's domain because of rounding (for instance ``1/sqrt(6R - 2)`` at
``R = 1/2``) are clamped when the excess is below :data:`CLAMP_TOL`; anything
larger raises :class:`NumericalError`.
"""

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, NumericalError

__all__ = ['BasisTag', 'BasisFunction', 'ONE', 'phi_angle', 'chi_values',
           'CLAMP_TOL']

CLAMP_TOL = 1e-12


class BasisTag(enum.Enum):
    ONE = 'ONE'
    SQRT_6R_MINUS_3 = 'SQRT_6R_MINUS_3'
    ARCCOS_INV_SQRT_6R_MINUS_2 = 'ARCCOS_INV_SQRT_6R_MINUS_2'
    ARCCOS_R_OVER_3R_MINUS_1 = 'ARCCOS_R_OVER_3R_MINUS_1'
    ATAN_SQRT_8R2_OVER_4R2_MINUS_1 = 'ATAN_SQRT_8R2_OVER_4R2_MINUS_1'
    ATAN_SQRT_2_OVER_12R2_MINUS_3 = 'ATAN_SQRT_2_OVER_12R2_MINUS_3'
    SQRT_4R2_MINUS_1 = 'SQRT_4R2_MINUS_1'
    # chi_j(phi(R)) with j a half-integer; the index is carried by BasisFunction
    CHI = 'CHI'


def _nonneg(x, what):
    x = np.asarray(x)
    if np.any(x < -CLAMP_TOL):
        raise NumericalError('%s is negative (min %g): evaluation outside '
                             'the validity interval' % (what, np.min(x)))
    return np.maximum(x, 0.0)


def _unit(x, what):
    if np.any(np.abs(x) > 1.0 + CLAMP_TOL):
        raise NumericalError('%s leaves [-1, 1] (max |.| = %g)'
                             % (what, np.max(np.abs(x))))
    return np.clip(x, -1.0, 1.0)


def _as_real(R):
    R = np.asarray(R)
    if R.dtype != np.longdouble:
        R = R.astype(float)
    return R


def phi_angle(R):
    """Angle ``phi(R)``: zero on ``[1/3, 1/2]``, ``arccos(1/sqrt(6R-2))`` above."""
    R = _as_real(R)
    out = np.zeros_like(R)
    hi = R > 0.5
    if np.any(hi):
        arg = _unit(1.0 / np.sqrt(6.0 * R[hi] - 2.0), '1/sqrt(6R-2)')
        out[hi] = np.arccos(arg)
    return out


def _sin_over(m, phi):
    # sin(m*phi)/m with the m -> 0 limit
    if m == 0:
        return phi
    return np.sin(m * phi) / m


def chi_values(twice_j, phi):
    """``chi_j(phi)`` for ``j = twice_j / 2``, vectorized over ``phi``."""
    six_j = 3 * twice_j
    return (_sin_over(six_j - 6, phi) - 2.0 * _sin_over(six_j, phi)
            + _sin_over(six_j + 6, phi))


def _eval_one(R, _):
    return np.ones_like(R)


def _eval_sqrt_6r_minus_3(R, _):
    return np.sqrt(_nonneg(6.0 * R - 3.0, '6R-3'))


def _eval_arccos_inv_sqrt(R, _):
    s = np.sqrt(_nonneg(6.0 * R - 2.0, '6R-2'))
    with np.errstate(divide='ignore'):
        arg = 1.0 / s
    return np.arccos(_unit(arg, '1/sqrt(6R-2)'))


def _eval_arccos_ratio(R, _):
    with np.errstate(divide='ignore', invalid='ignore'):
        arg = R / (3.0 * R - 1.0)
    return np.arccos(_unit(arg, 'R/(3R-1)'))


def _eval_atan_8(R, _):
    # arctan(sqrt(a/b)) == arctan2(sqrt(a), sqrt(b)) is finite at b = 0
    num = np.sqrt(_nonneg(8.0 * R - 2.0, '8r^2'))
    den = np.sqrt(_nonneg(4.0 * R - 2.0, '4r^2-1'))
    return np.arctan2(num, den)


def _eval_atan_2(R, _):
    den = np.sqrt(_nonneg(12.0 * R - 6.0, '12r^2-3'))
    return np.arctan2(np.sqrt(den.dtype.type(2)), den)


def _eval_sqrt_4r2_minus_1(R, _):
    return np.sqrt(_nonneg(4.0 * R - 2.0, '4r^2-1'))


def _eval_chi(R, twice_j):
    return chi_values(twice_j, phi_angle(R))


_EVALUATORS = {
    BasisTag.ONE: _eval_one,
    BasisTag.SQRT_6R_MINUS_3: _eval_sqrt_6r_minus_3,
    BasisTag.ARCCOS_INV_SQRT_6R_MINUS_2: _eval_arccos_inv_sqrt,
    BasisTag.ARCCOS_R_OVER_3R_MINUS_1: _eval_arccos_ratio,
    BasisTag.ATAN_SQRT_8R2_OVER_4R2_MINUS_1: _eval_atan_8,
    BasisTag.ATAN_SQRT_2_OVER_12R2_MINUS_3: _eval_atan_2,
    BasisTag.SQRT_4R2_MINUS_1: _eval_sqrt_4r2_minus_1,
    BasisTag.CHI: _eval_chi,
}


@dataclass(frozen=True)
class BasisFunction:
    """A named real function of the purity.

    ``twice_j`` is only meaningful for :attr:`BasisTag.CHI`, where the
    function is ``chi_j(phi(R))`` with ``j = twice_j / 2``.
    """

    tag: BasisTag
    twice_j: int = 0

    def __post_init__(self):
        if self.tag is BasisTag.CHI and self.twice_j < 0:
            raise DomainError('chi index must be nonnegative')
        if self.tag is not BasisTag.CHI and self.twice_j != 0:
            raise DomainError('only CHI basis functions carry an index')

    def __call__(self, R):
        """Evaluate at ``R``; long-double input is evaluated in long double."""
        R = _as_real(R)
        return _EVALUATORS[self.tag](R, self.twice_j)

    @property
    def name(self):
        if self.tag is BasisTag.CHI:
            return 'CHI_%s' % Fraction(self.twice_j, 2)
        return self.tag.value

    @classmethod
    def from_name(cls, name):
        if name.startswith('CHI_'):
            j = Fraction(name[4:])
            if (2 * j).denominator != 1:
                raise DomainError('bad chi index in %r' % name)
            return cls(BasisTag.CHI, int(2 * j))
        try:
            return cls(BasisTag(name))
        except ValueError:
            raise DomainError('unknown basis function %r' % name) from None

    def __repr__(self):
        return 'BasisFunction(%s)' % self.name


ONE = BasisFunction(BasisTag.ONE)
