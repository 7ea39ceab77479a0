"""Core types: bipartite dimensions and piecewise densities of the purity.

A :class:`PiecewisePdf` stores its pieces in purity coordinates.  A density
over another variable ``x`` (the linear entropy) is the same pieces plus an
affine map ``R = offset + scale * x``; its value is ``|scale| * P(R)``.
"""

import json
from fractions import Fraction
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .basis import BasisFunction, ONE
from .errors import DomainError, NumericalError

__all__ = [
    'BipartiteDims', 'Term', 'Piece', 'PiecewisePdf',
    'linear_entropy_from_purity', 'purity_from_linear_entropy',
    'pdf_to_linear_entropy_pdf', 'linear_entropy_pdf_to_purity_pdf',
    'eval_pdf', 'eval_piece', 'cdf', 'cdf_many', 'integrate_pdf',
    'pdf_moment', 'breakpoint_jumps', 'rounding_error_bound',
]

PURITY = 'purity'
LINEAR_ENTROPY = 'linear-entropy'

_EPS = np.finfo(np.longdouble).eps
# breakpoints and support ends are compared with this slack
_SNAP = 1e-14


@dataclass(frozen=True)
class BipartiteDims:
    """Dimensions ``p <= q`` of the two factors of the Hilbert space."""

    p: int
    q: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.q) != self.q:
            raise DomainError('dimensions must be integers')
        if not 2 <= self.p <= self.q:
            raise DomainError('need 2 <= p <= q, got p=%s q=%s'
                              % (self.p, self.q))

    @property
    def d(self):
        return self.q - self.p

    @property
    def purity_min(self):
        return 1.0 / self.p


@dataclass(frozen=True)
class Term:
    """``coefficient * v**power * basis(R)`` with ``v`` either ``R`` or ``r``.

    ``r = sqrt(R - 1/p)`` is the radial variable of the family.  The
    coefficient is the unevaluated sum ``coefficient + coefficient_lo`` of two
    doubles, so it carries about 32 significant digits; pieces are summed in
    long double, where the low part matters.
    """

    coefficient: float
    power: int = 0
    variable: str = 'R'
    basis: BasisFunction = ONE
    coefficient_lo: float = 0.0

    @classmethod
    def from_value(cls, value, power=0, variable='R', basis=ONE):
        """Build a term from a high-precision coefficient (mpmath or Fraction)."""
        hi = float(value)
        if isinstance(value, Fraction):
            lo = float(value - Fraction(hi))
        else:
            lo = float(value - hi)
        return cls(hi, power, variable, basis, lo)

    @property
    def value(self):
        return np.longdouble(self.coefficient) + np.longdouble(self.coefficient_lo)

    def __post_init__(self):
        if self.variable not in ('R', 'r'):
            raise DomainError('term variable must be "R" or "r"')
        if self.power < 0:
            raise DomainError('monomial powers are nonnegative')


@dataclass(frozen=True)
class Piece:
    lo: float
    hi: float
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple(self.terms))


@dataclass(frozen=True)
class PiecewisePdf:
    """Density on ``[1/p, 1]`` in purity, optionally reparametrized.

    Parameters
    ----------
    dims : BipartiteDims
    pieces : sequence of Piece
        Contiguous pieces covering ``[1/p, 1]`` in purity coordinates.
    variable : {'purity', 'linear-entropy'}
        Name of the variable the density is expressed in.
    offset, scale : float
        Affine map from the variable to the purity, ``R = offset + scale*x``.
    label : str
        Free-form provenance (which formula produced the density).
    """

    dims: BipartiteDims
    pieces: tuple
    variable: str = PURITY
    offset: float = 0.0
    scale: float = 1.0
    label: str = ''
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, 'pieces', pieces)
        if not pieces:
            raise DomainError('a density needs at least one piece')
        if abs(pieces[0].lo - self.dims.purity_min) > _SNAP:
            raise DomainError('first piece must start at 1/p')
        if abs(pieces[-1].hi - 1.0) > _SNAP:
            raise DomainError('last piece must end at 1')
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.hi - b.lo) > _SNAP:
                raise DomainError('pieces must be contiguous')
        if any(pc.hi <= pc.lo for pc in pieces):
            raise DomainError('breakpoints must be strictly increasing')
        if self.scale == 0:
            raise DomainError('degenerate reparametrization')

    @property
    def p(self):
        return self.dims.p

    @property
    def breakpoints(self):
        """Sorted breakpoints in the density's own variable."""
        r_points = [self.pieces[0].lo] + [pc.hi for pc in self.pieces]
        out = []
        for R in r_points:
            v = float(self.to_variable(R))
            # undo affine-map rounding on short decimals (S_L = 1/2, 1, ...)
            short = round(v, 12)
            out.append(short if abs(v - short) <= _SNAP else v)
        return sorted(out)

    @property
    def support(self):
        b = self.breakpoints
        return b[0], b[-1]

    def to_purity(self, x):
        return self.offset + self.scale * np.asarray(x, dtype=float)

    def to_variable(self, R):
        return (np.asarray(R, dtype=float) - self.offset) / self.scale

    def __call__(self, x):
        return eval_pdf(self, x)

    # serialization ---------------------------------------------------------

    def to_dict(self):
        def num(v):
            return format(float(v), '.17g')
        return {
            'dims': {'p': self.dims.p, 'q': self.dims.q},
            'variable': self.variable,
            'offset': num(self.offset),
            'scale': num(self.scale),
            'label': self.label,
            'pieces': [
                {'lo': num(pc.lo), 'hi': num(pc.hi),
                 'terms': [{'coefficient': num(t.coefficient),
                            'coefficient_lo': num(t.coefficient_lo),
                            'power': t.power,
                            'variable': t.variable,
                            'basis': t.basis.name} for t in pc.terms]}
                for pc in self.pieces],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data):
        dims = BipartiteDims(int(data['dims']['p']), int(data['dims']['q']))
        pieces = [
            Piece(float(pc['lo']), float(pc['hi']),
                  [Term(float(t['coefficient']), int(t['power']),
                        t['variable'], BasisFunction.from_name(t['basis']),
                        float(t.get('coefficient_lo', 0.0)))
                   for t in pc['terms']])
            for pc in data['pieces']]
        return cls(dims, pieces, data.get('variable', PURITY),
                   float(data.get('offset', 0.0)),
                   float(data.get('scale', 1.0)), data.get('label', ''))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# purity <-> linear entropy
# ---------------------------------------------------------------------------

def _check_purity(dims, R):
    R = np.asarray(R, dtype=float)
    lo = dims.purity_min
    if np.any((R < lo - _SNAP) | (R > 1.0 + _SNAP)) or np.any(np.isnan(R)):
        raise DomainError('purity must lie in [1/p, 1] = [%g, 1]' % lo)
    return R


def linear_entropy_from_purity(dims, R):
    """Linear entropy ``p/(p-1) * (1 - R)``."""
    R = _check_purity(dims, R)
    p = dims.p
    s = p / (p - 1) * (1.0 - R)
    return float(s) if s.ndim == 0 else s


def purity_from_linear_entropy(dims, s):
    s = np.asarray(s, dtype=float)
    if np.any((s < -_SNAP) | (s > 1.0 + _SNAP)) or np.any(np.isnan(s)):
        raise DomainError('linear entropy must lie in [0, 1]')
    p = dims.p
    R = 1.0 - (p - 1) / p * s
    return float(R) if R.ndim == 0 else R


def pdf_to_linear_entropy_pdf(pdf):
    """Density of ``S_L`` given the density of the purity.

    ``P~(S) = (p-1)/p * P(1 - (p-1)/p * S)``; breakpoints reverse order.
    """
    if pdf.variable != PURITY:
        raise DomainError('expected a purity density, got %r' % pdf.variable)
    c = (pdf.p - 1) / pdf.p
    # compose R = a + b*x with x = 1 - c*S
    return replace(pdf, variable=LINEAR_ENTROPY,
                   offset=pdf.offset + pdf.scale, scale=-pdf.scale * c)


def linear_entropy_pdf_to_purity_pdf(pdf):
    """Inverse of :func:`pdf_to_linear_entropy_pdf`."""
    if pdf.variable != LINEAR_ENTROPY:
        raise DomainError('expected a linear-entropy density, got %r'
                          % pdf.variable)
    c = (pdf.p - 1) / pdf.p
    # S = (1 - R2)/c, so R = a + b/c - (b/c) R2
    k = pdf.scale / c
    return replace(pdf, variable=PURITY, offset=pdf.offset + k, scale=-k)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _term_values(term, R, r):
    v = R if term.variable == 'R' else r
    mono = v ** term.power if term.power else np.ones_like(R)
    return term.value * mono * term.basis(R)


def _piece_sum(piece, R, p):
    """Sum of a piece's terms, computed in long double, returned as float."""
    R = np.asarray(R, dtype=np.longdouble)
    r = np.sqrt(np.maximum(R - np.longdouble(1) / p, 0))
    total = np.zeros_like(R)
    size = np.zeros_like(R)
    for term in piece.terms:
        t = _term_values(term, R, r)
        total += t
        size += np.abs(t)
    # values indistinguishable from zero within the summation rounding bound
    # are returned as exactly zero rather than as signed noise
    bound = (len(piece.terms) + 4) * _EPS * size
    total = np.where((total < 0) & (total >= -bound), 0, total)
    if not np.all(np.isfinite(total)):
        raise NumericalError('non-finite density value inside a piece')
    return total.astype(float)


def rounding_error_bound(pdf, points=257):
    """Largest summation rounding bound of the density over its support.

    Scans ``points`` purities per piece and returns, in the units of the
    density, ``(n_terms + 4) * eps * sum |term|`` at its worst.  Large values
    flag cancellation between big terms (3 x q for large q).
    """
    worst = 0.0
    for piece in pdf.pieces:
        R = np.linspace(piece.lo, piece.hi, points).astype(np.longdouble)
        r = np.sqrt(np.maximum(R - np.longdouble(1) / pdf.p, 0))
        size = np.zeros_like(R)
        for term in piece.terms:
            size += np.abs(_term_values(term, R, r))
        bound = (len(piece.terms) + 4) * _EPS * np.max(size)
        worst = max(worst, float(bound))
    return worst * abs(pdf.scale)


def _purity_density(pdf, R):
    """P(R) for an array of purities (zero outside the support)."""
    p = pdf.p
    lo = pdf.pieces[0].lo
    out = np.zeros_like(R)
    # snap rounding residue of the affine map onto the support ends
    R = np.where(np.abs(R - lo) <= _SNAP, lo, R)
    R = np.where(np.abs(R - 1.0) <= _SNAP, 1.0, R)
    n = len(pdf.pieces)
    for i, piece in enumerate(pdf.pieces):
        if i == n - 1:
            mask = (R >= piece.lo) & (R <= piece.hi)
        else:
            mask = (R >= piece.lo) & (R < piece.hi)
        if np.any(mask):
            out[mask] = _piece_sum(piece, R[mask], p)
    return out


def eval_pdf(pdf, x):
    """Evaluate the density at ``x`` (scalar or array).

    Pieces are half-open ``[lo, hi)`` in purity, the last one closed.
    """
    x_arr = np.asarray(x, dtype=float)
    R = np.atleast_1d(pdf.to_purity(x_arr))
    vals = abs(pdf.scale) * _purity_density(pdf, R)
    if x_arr.ndim == 0:
        return float(vals[0])
    return vals.reshape(x_arr.shape)


def eval_piece(pdf, index, x):
    """Evaluate piece ``index`` at ``x`` even on its closure.

    Used to take one-sided limits at breakpoints.
    """
    piece = pdf.pieces[index]
    R = np.atleast_1d(pdf.to_purity(x))
    R = np.clip(R, piece.lo, piece.hi)
    vals = abs(pdf.scale) * _piece_sum(piece, R, pdf.p)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def breakpoint_jumps(pdf):
    """``(R_b, left, right)`` for every interior breakpoint, in purity."""
    out = []
    for i in range(len(pdf.pieces) - 1):
        b = pdf.pieces[i].hi
        x = float(pdf.to_variable(b))
        out.append((b, eval_piece(pdf, i, x), eval_piece(pdf, i + 1, x)))
    return out


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _variable_intervals(pdf):
    """Piece intervals in the density's own variable, ascending."""
    b = pdf.breakpoints
    return list(zip(b[:-1], b[1:]))


def _quad(func, a, b, epsabs):
    val, err, info = integrate.quad(func, a, b, epsabs=epsabs, epsrel=1e-13,
                                    limit=200, full_output=1)[:3]
    if err > max(100 * epsabs, 1e-9):
        raise NumericalError('quadrature on [%r, %r] did not converge: '
                             'estimate %r, error %r, %d evaluations'
                             % (a, b, val, err, info['neval']))
    return val


def integrate_pdf(pdf, weight=None, upper=None, epsabs=1e-12):
    """Integral of ``weight(x) * pdf(x)`` from the support start to ``upper``.

    The range is split at every breakpoint so the integrand is smooth inside
    each panel.
    """
    lo, hi = pdf.support
    upper = hi if upper is None else min(float(upper), hi)
    total = 0.0
    for a, b in _variable_intervals(pdf):
        if a >= upper:
            break
        b = min(b, upper)
        if weight is None:
            f = lambda t: eval_pdf(pdf, t)
        else:
            f = lambda t: weight(t) * eval_pdf(pdf, t)
        total += _quad(f, a, b, epsabs)
    return total


def cdf(pdf, x):
    """Cumulative distribution function, clamped to ``[0, 1]``."""
    lo, hi = pdf.support
    if x <= lo:
        return 0.0
    if x >= hi:
        x = hi
    return min(1.0, max(0.0, integrate_pdf(pdf, upper=x)))


def pdf_moment(pdf, n):
    """``int x**n pdf(x) dx`` by adaptive quadrature."""
    return integrate_pdf(pdf, weight=lambda t: t ** n)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_GL3_X, _GL3_W = np.polynomial.legendre.leggauss(3)
_DENSE_CELLS = 20000


def cdf_many(pdf, x):
    """Vectorized CDF for many points.

    Composite Gauss-Legendre over the cells between consecutive sorted
    abscissae and breakpoints, accumulated by a running sum.  This is how the
    validator evaluates the CDF at a million samples.  Ten nodes per cell are
    used for sparse inputs; above :data:`_DENSE_CELLS` cells they are so
    narrow that three nodes (exact to degree five) suffice.  Cells that
    are wide compared with their distance to a breakpoint go through adaptive
    quadrature instead.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = pdf.support
    xc = np.clip(x, lo, hi)
    nodes = np.unique(np.concatenate([xc.ravel(), pdf.breakpoints]))
    a, b = nodes[:-1], nodes[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    gx, gw = (_GL3_X, _GL3_W) if len(a) > _DENSE_CELLS else (_GL_X, _GL_W)
    pts = mid[:, None] + half[:, None] * gx[None, :]
    vals = eval_pdf(pdf, pts.ravel()).reshape(pts.shape)
    cell = half * (vals @ gw)
    # endpoint singularities sit at breakpoints: cells that are wide compared
    # with their distance to the nearest breakpoint go to adaptive quadrature
    bp = np.asarray(pdf.breakpoints)
    j = np.clip(np.searchsorted(bp, a), 1, len(bp) - 1)
    dist = np.minimum(np.abs(a - bp[j - 1]), np.abs(bp[j] - b))
    dist = np.minimum(dist, np.abs(b - bp[j - 1]))
    near = np.flatnonzero((b > a) & (b - a > 0.1 * dist))
    f = lambda t: eval_pdf(pdf, t)
    for i in near:
        cell[i] = _quad(f, a[i], b[i], 1e-15)
    cum = np.concatenate([[0.0], np.cumsum(cell)])
    out = cum[np.searchsorted(nodes, xc)]
    return np.clip(out, 0.0, 1.0)
