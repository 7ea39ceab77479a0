"""Purity densities for 4 x q systems by moment matching.

For ``p = 4`` the density, written in ``r = sqrt(R - 1/4)``, has the form

* ``A5(r)`` on ``[1/4, 1/3]``,
* ``A6(r)`` on ``[1/3, 1/2]``,
* ``A1(r) + A2(r) atan sqrt(8r^2/(4r^2-1)) + A3(r) atan sqrt(2/(12r^2-3))
  + A4(r) sqrt(4r^2-1)`` on ``[1/2, 1]``,

with polynomials ``A_i`` of degree ``13 + 4d``.  The ``6 (14 + 4d)``
coefficients are fixed by requiring the first ``6 (14 + 4d)`` moments to match
the exact rationals from :mod:`puritydist.moments`.

Raw moments make a violently ill-conditioned matrix (pivot ratio about
``10**158`` for ``d = 0``, growing by about 48 digits per unit of ``d``).  The
default route instead fits shifted Legendre moments ``<P~_n(R)>``, exact
rational combinations of the same ``<R^m>``.  Their entries are integrated
directly by tanh-sinh quadrature, and a full-pivot elimination truncated at
the numerical rank gives a basic solution that reproduces the density at 60
digits.  Held-out raw moments then check the result.  The full-rank monomial
solve is kept as ``moment_basis='monomial'``.
"""

import json
import logging
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path

import mpmath

from .basis import BasisFunction, BasisTag, ONE
from .errors import (DomainError, InsufficientPrecisionError, NumericalError,
                     VerificationError)
from .model import BipartiteDims, Piece, PiecewisePdf, Term
from .moments import purity_moments

__all__ = ['SEGMENTS', 'SEGMENT_BASES', 'MomentSystem', 'Solution4xq',
           'SolutionCache', 'basis_integral', 'assemble_system',
           'solve_4xq', 'solve_pdf_4xq', 'ansatz_residual',
           'default_precision', 'unknown_count', 'CACHE_ENV', 'MOMENT_BASES',
           'shifted_legendre_coefficients']

logger = logging.getLogger(__name__)

CACHE_ENV = 'PURITYDIST_CACHE_DIR'
HELD_OUT_TOL = 1e-8
# rank truncation: pivots below 10**-(dps - RANK_GUARD) of the first are noise
RANK_GUARD = 10

ATAN_8 = BasisFunction(BasisTag.ATAN_SQRT_8R2_OVER_4R2_MINUS_1)
ATAN_2 = BasisFunction(BasisTag.ATAN_SQRT_2_OVER_12R2_MINUS_3)
SQRT_4 = BasisFunction(BasisTag.SQRT_4R2_MINUS_1)

# segment index k -> purity interval [1/k, 1/(k-1)]
SEGMENTS = {4: (0.25, 1 / 3), 3: (1 / 3, 0.5), 2: (0.5, 1.0)}
SEGMENT_BASES = {4: (ONE,), 3: (ONE,), 2: (ONE, ATAN_8, ATAN_2, SQRT_4)}
_SEGMENT_ORDER = (4, 3, 2)


def unknown_count(d):
    return 6 * (14 + 4 * d)


def default_precision(d, moment_basis='legendre'):
    """Working precision (decimal digits) used when none is requested.

    The rank-truncated Legendre solve is accurate at 60 digits.  The
    equilibrated monomial matrix has a condition number of roughly
    ``10**(158 + 48 d)``; its default keeps that below the precision of the
    reduced verification solve (``dps - dps//5``) with 40 digits to spare.
    """
    if moment_basis == 'legendre':
        return 60
    return int(1.25 * (158 + 48 * d + 10)) + 40


def _segment_r_bounds(k):
    """Segment ``k`` in the radial variable: ``[sqrt(1/k-1/4), sqrt(1/(k-1)-1/4)]``."""
    lo = mpmath.sqrt(mpmath.mpf(1) / k - mpmath.mpf(1) / 4)
    hi = mpmath.sqrt(mpmath.mpf(1) / (k - 1) - mpmath.mpf(1) / 4)
    return lo, hi


# ---------------------------------------------------------------------------
# integral tables  T[m] = int_segment r**m g(r) dr
# ---------------------------------------------------------------------------

def _g_mp(tag, delta):
    """``g(r)`` at ``r = 1/2 + delta`` (segment 2 only), cancellation-free."""
    if tag is BasisTag.ONE:
        return mpmath.mpf(1)
    r = mpmath.mpf(1) / 2 + delta
    s = mpmath.sqrt(4 * delta * (1 + delta))          # sqrt(4r^2 - 1)
    if tag is BasisTag.SQRT_4R2_MINUS_1:
        return s
    if tag is BasisTag.ATAN_SQRT_8R2_OVER_4R2_MINUS_1:
        return mpmath.atan2(mpmath.sqrt(8) * r, s)
    if tag is BasisTag.ATAN_SQRT_2_OVER_12R2_MINUS_3:
        return mpmath.atan2(mpmath.sqrt(2), mpmath.sqrt(3) * s)
    raise DomainError('no quadrature rule for %s' % tag)


class _TanhSinh:
    """Tanh-sinh rule on ``[a, b]`` refined level by level.

    Subclasses receive every node through ``_accumulate(r, delta, w)`` where
    ``delta = r - a`` is formed without cancellation near the left end, which
    is where the segment-2 basis functions have square-root behaviour.
    """

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.width = b - a
        self.level = 0
        self.h = mpmath.mpf(1)
        self._add_nodes(range(0, 10 ** 9))

    def _add_nodes(self, ks):
        eps = mpmath.eps * mpmath.mpf(2) ** -20
        half_pi = mpmath.pi / 2
        for k in ks:
            t = k * self.h
            u = half_pi * mpmath.sinh(t)
            w = half_pi * mpmath.cosh(t) / mpmath.cosh(u) ** 2
            if w < eps:
                break
            frac = 1 / (mpmath.exp(2 * u) + 1)     # distance to an end / width
            w = w * self.width / 2
            if t == 0:
                self._accumulate(self.a + self.width / 2, self.width / 2, w)
                continue
            d_left = self.width * frac
            self._accumulate(self.a + d_left, d_left, w)
            r_right = self.b - d_left
            self._accumulate(r_right, r_right - self.a, w)

    def refine(self):
        """Halve the step: only odd multiples of the new step are new nodes."""
        self.h /= 2
        self.level += 1
        self._add_nodes(range(1, 10 ** 9, 2))


class _TanhSinhTable(_TanhSinh):
    """All power moments ``int_a^b r**m g(r) dr`` from one node set."""

    def __init__(self, tag, m_max):
        self.tag = tag
        self.m_max = m_max
        self.sums = [mpmath.mpf(0)] * (m_max + 1)
        super().__init__(*_segment_r_bounds(2))

    def _accumulate(self, r, delta, w):
        v = w * _g_mp(self.tag, delta)
        sums = self.sums
        for m in range(self.m_max + 1):
            sums[m] += v
            v *= r

    def estimate(self):
        return [s * self.h for s in self.sums]


class _LegendreBlock(_TanhSinh):
    """``int P~_n(R) r**nu g(r) dR`` over one segment, all ``n`` and ``nu``.

    ``P~_n`` is the Legendre polynomial shifted to ``[1/4, 1]``, evaluated at
    every node by its three-term recurrence in ``t = (8 r**2 - 3)/3``.
    """

    def __init__(self, basis, k, n_rows, nu_max):
        self.tag = basis.tag
        self.n_rows = n_rows
        self.nu_max = nu_max
        self.sums = [[mpmath.mpf(0)] * (nu_max + 1) for _ in range(n_rows)]
        a, b = _segment_r_bounds(k)
        if k != 2 and self.tag is not BasisTag.ONE:
            raise DomainError('%s is not part of the ansatz on segment %d'
                              % (basis.name, k))
        super().__init__(a, b)

    def _accumulate(self, r, delta, w):
        v = 2 * r * w * _g_mp(self.tag, delta)
        t = (8 * r * r - 3) / 3
        powers = [v]
        for _ in range(self.nu_max):
            powers.append(powers[-1] * r)
        p_prev, p_cur = mpmath.mpf(0), mpmath.mpf(1)
        for n in range(self.n_rows):
            row = self.sums[n]
            for nu in range(self.nu_max + 1):
                row[nu] += p_cur * powers[nu]
            p_prev, p_cur = p_cur, ((2 * n + 1) * t * p_cur - n * p_prev) / (n + 1)

    def estimate(self):
        return [[v * self.h for v in row] for row in self.sums]


def _legendre_entries(basis, k, n_rows, nu_max, max_level=14):
    """Converged :class:`_LegendreBlock`; changes are judged per row."""
    block = _LegendreBlock(basis, k, n_rows, nu_max)
    previous = block.estimate()
    tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 5))
    for _ in range(max_level):
        block.refine()
        current = block.estimate()
        change = max(
            max(abs(c - p) for c, p in zip(cr, pr)) / max(abs(c) for c in cr)
            for cr, pr in zip(current, previous))
        if block.level >= 3 and change < tol:
            return current
        previous = current
    raise NumericalError(
        'Legendre moment quadrature for %s on segment %d did not converge: '
        'relative change %s after %d levels at %d digits'
        % (basis.name, k, mpmath.nstr(change, 3), block.level,
           mpmath.mp.dps))


def shifted_legendre_coefficients(n_max):
    """Exact coefficients (ascending powers of ``R``) of ``P_n((8R-5)/3)``."""
    polys = [[Fraction(1)]]
    if n_max >= 1:
        polys.append([Fraction(-5, 3), Fraction(8, 3)])
    for n in range(1, n_max):
        # (n+1) P_{n+1} = (2n+1) t P_n - n P_{n-1},  t = (8R - 5)/3
        tp = [Fraction(0)] * (len(polys[n]) + 1)
        for i, c in enumerate(polys[n]):
            tp[i] += Fraction(-5, 3) * c
            tp[i + 1] += Fraction(8, 3) * c
        nxt = [Fraction(2 * n + 1, n + 1) * c for c in tp]
        for i, c in enumerate(polys[n - 1]):
            nxt[i] -= Fraction(n, n + 1) * c
        polys.append(nxt)
    return polys[:n_max + 1]


def _quadrature_table(tag, m_max, max_level=14):
    table = _TanhSinhTable(tag, m_max)
    previous = table.estimate()
    tol = mpmath.mpf(10) ** (-(mpmath.mp.dps - 3))
    for _ in range(max_level):
        table.refine()
        current = table.estimate()
        change = max(abs(c - p) / abs(c) for c, p in zip(current, previous))
        if table.level >= 3 and change < tol:
            return current
        previous = current
    raise NumericalError(
        'tanh-sinh table for %s did not converge: relative change %s after '
        '%d levels at %d digits' % (tag.value, mpmath.nstr(change, 3),
                                    table.level, mpmath.mp.dps))


_TABLE_CACHE = {}


def _power_table(basis, k, m_max):
    """``[int_seg r**m g(r) dr for m in 0..m_max]`` at the current precision."""
    key = (basis, k, mpmath.mp.dps)
    cached = _TABLE_CACHE.get(key)
    if cached is not None and len(cached) > m_max:
        return cached
    if basis not in SEGMENT_BASES[k]:
        raise DomainError('%s is not part of the ansatz on segment %d'
                          % (basis.name, k))
    if basis.tag is BasisTag.ONE:
        lo, hi = _segment_r_bounds(k)
        table = [(hi ** (m + 1) - lo ** (m + 1)) / (m + 1)
                 for m in range(m_max + 1)]
    else:
        table = _quadrature_table(basis.tag, m_max)
    _TABLE_CACHE[key] = table
    return table


def _moment_entries(basis, k, n_max, nu_max):
    """``E[n][nu] = int R**n r**nu g(r) dR`` over segment ``k``.

    Uses ``dR = 2r dr`` and ``R = r**2 + 1/4``, so that
    ``E[n+1][nu] = E[n][nu+2] + E[n][nu]/4``.
    """
    width = nu_max + 2 * n_max + 1
    table = _power_table(basis, k, width + 1)
    row = [2 * table[m + 1] for m in range(width + 1)]
    rows = [row]
    quarter = mpmath.mpf(1) / 4
    for _ in range(n_max):
        row = [row[m + 2] + quarter * row[m] for m in range(len(row) - 2)]
        rows.append(row)
    return [r[:nu_max + 1] for r in rows]


def basis_integral(nu, g, segment_k, moment_n, dps=50):
    """``int R**n r**nu g(r) dR`` over segment ``k`` (``dR = 2 r dr``).

    Segment ``k`` is the purity interval ``[1/k, 1/(k-1)]``, ``k in {2,3,4}``.
    Returned as an mpmath number accurate to about ``dps`` digits.
    """
    if segment_k not in SEGMENTS:
        raise DomainError('segment index must be 2, 3 or 4')
    if nu < 0 or moment_n < 0:
        raise DomainError('powers must be nonnegative')
    with mpmath.workdps(dps):
        table = _power_table(g, segment_k, nu + 2 * moment_n + 1)
        quarter = mpmath.mpf(1) / 4
        total = mpmath.fsum(comb(moment_n, j) * quarter ** (moment_n - j)
                            * table[nu + 2 * j + 1]
                            for j in range(moment_n + 1))
        return +(2 * total)


# ---------------------------------------------------------------------------
# linear system
# ---------------------------------------------------------------------------

@dataclass
class MomentSystem:
    """Moment equations ``sum_i M[n][i] x_i = b[n]``.

    ``layout[i] = (segment_k, basis, nu)`` names unknown ``i``.  With
    ``moment_basis='monomial'`` row ``n`` is ``<R^n>``; with ``'legendre'``
    it is ``<P~_n(R)>``, the shifted Legendre moment, an exact rational
    combination of the same ``<R^m>``.  Entries are mpmath numbers at ``dps``
    digits.
    """

    d: int
    dps: int
    layout: list
    matrix: list
    rhs: list
    moments: list
    moment_basis: str = 'monomial'

    @property
    def size(self):
        return len(self.layout)


MOMENT_BASES = ('legendre', 'monomial')


def _layout(d):
    degree = 13 + 4 * d
    return [(k, g, nu) for k in _SEGMENT_ORDER for g in SEGMENT_BASES[k]
            for nu in range(degree + 1)]


def assemble_system(d, dps=None, rows=None, moment_basis='legendre'):
    """Build the ``6(14+4d)``-unknown moment system (optionally with extra rows).

    Legendre rows are integrated directly, never formed from monomial rows,
    which would cancel catastrophically.
    """
    if int(d) != d or d < 0:
        raise DomainError('d must be a nonnegative integer')
    if moment_basis not in MOMENT_BASES:
        raise DomainError('moment_basis must be one of %s' % (MOMENT_BASES,))
    d = int(d)
    dps = default_precision(d, moment_basis) if dps is None else int(dps)
    layout = _layout(d)
    n_rows = len(layout) if rows is None else int(rows)
    degree = 13 + 4 * d
    moments = purity_moments(BipartiteDims(4, 4 + d), n_rows - 1)
    with mpmath.workdps(dps):
        blocks = {}
        for k in _SEGMENT_ORDER:
            for g in SEGMENT_BASES[k]:
                if moment_basis == 'legendre':
                    blocks[(k, g)] = _legendre_entries(g, k, n_rows, degree)
                else:
                    blocks[(k, g)] = _moment_entries(g, k, n_rows - 1, degree)
        matrix = [[blocks[(k, g)][n][nu] for (k, g, nu) in layout]
                  for n in range(n_rows)]
        if moment_basis == 'legendre':
            exact = [sum((c * m for c, m in zip(poly, moments)), Fraction(0))
                     for poly in shifted_legendre_coefficients(n_rows - 1)]
        else:
            exact = moments
        rhs = [mpmath.mpf(m.numerator) / m.denominator for m in exact]
    return MomentSystem(d, dps, layout, matrix, rhs, moments, moment_basis)


def _gauss_full_pivot(matrix, rhs, rank_tol=None):
    """Solve a square system by Gaussian elimination with full pivoting.

    Rows are scaled to unit max-norm, then columns.  Without ``rank_tol`` a
    pivot at the rounding level raises :class:`InsufficientPrecisionError`.
    With ``rank_tol`` elimination stops at the first pivot below
    ``rank_tol`` times the first one and the remaining unknowns are set to
    zero (a basic solution of the numerically rank-deficient system).

    Returns ``(x, ratio, rank)`` where ``ratio`` is the largest over the
    smallest retained pivot, a cheap condition estimate.
    """
    n = len(matrix)
    a = []
    for row, b in zip(matrix, rhs):
        s = max(abs(v) for v in row)
        if s == 0:
            raise NumericalError('zero row in moment matrix')
        a.append([v / s for v in row] + [b / s])
    col_scale = []
    for c in range(n):
        s = max(abs(row[c]) for row in a)
        if s == 0:
            raise NumericalError('zero column in moment matrix')
        col_scale.append(s)
        for row in a:
            row[c] /= s
    cols = list(range(n))
    pivots = []
    tiny = mpmath.mpf(10) ** (-mpmath.mp.dps + 2)
    rank = n
    for i in range(n):
        best, pr, pc = -1, i, i
        for r in range(i, n):
            row = a[r]
            for c in range(i, n):
                v = abs(row[c])
                if v > best:
                    best, pr, pc = v, r, c
        if rank_tol is not None and pivots and best < rank_tol * pivots[0]:
            rank = i
            break
        if best <= tiny:
            raise InsufficientPrecisionError(
                'moment matrix is numerically singular at %d digits '
                '(pivot %d of %d is %s)' % (mpmath.mp.dps, i, n,
                                            mpmath.nstr(best, 3)),
                condition_estimate=float('inf'), dps=mpmath.mp.dps)
        a[i], a[pr] = a[pr], a[i]
        if pc != i:
            for row in a:
                row[i], row[pc] = row[pc], row[i]
            cols[i], cols[pc] = cols[pc], cols[i]
        piv_row = a[i]
        piv = piv_row[i]
        pivots.append(abs(piv))
        for r in range(i + 1, n):
            row = a[r]
            f = row[i] / piv
            if f:
                for c in range(i, n + 1):
                    row[c] -= f * piv_row[c]
    y = [mpmath.mpf(0)] * n
    for i in range(rank - 1, -1, -1):
        row = a[i]
        s = row[n] - mpmath.fsum(row[c] * y[c] for c in range(i + 1, rank))
        y[i] = s / row[i]
    x = [mpmath.mpf(0)] * n
    for i, c in enumerate(cols):
        x[c] = y[i] / col_scale[c]
    return x, max(pivots) / min(pivots), rank


def _least_squares(matrix, rhs):
    """Row-scaled least squares via Householder QR.  Returns ``(x, residual)``."""
    scaled, b = [], []
    for row, v in zip(matrix, rhs):
        s = max(abs(e) for e in row)
        scaled.append([e / s for e in row])
        b.append(v / s)
    try:
        x, res = mpmath.qr_solve(mpmath.matrix(scaled), mpmath.matrix(b))
    except ValueError as exc:
        raise InsufficientPrecisionError(
            'least-squares moment system is singular at %d digits: %s'
            % (mpmath.mp.dps, exc), condition_estimate=float('inf'),
            dps=mpmath.mp.dps) from None
    return [x[i] for i in range(len(x))], res


# ---------------------------------------------------------------------------
# solution
# ---------------------------------------------------------------------------

@dataclass
class Solution4xq:
    """Solved coefficients plus the diagnostics of the solve."""

    q: int
    dps: int
    layout: list
    coefficients: list
    condition_estimate: float
    held_out: list
    zeroed: list
    method: str = 'legendre'
    rank: int = None
    seconds: float = 0.0
    from_cache: bool = False
    pdf: PiecewisePdf = field(default=None, repr=False)

    @property
    def d(self):
        return self.q - 4

    @property
    def max_held_out_error(self):
        return max((e for _, e in self.held_out), default=0.0)

    def polynomial(self, k, basis):
        """Coefficients (ascending powers of r) of one ``A_i`` polynomial."""
        return [c for (kk, g, _), c in zip(self.layout, self.coefficients)
                if kk == k and g == basis]

    def moment(self, n):
        """``<R^n>`` of the solved density, in working precision."""
        with mpmath.workdps(self.dps):
            degree = 13 + 4 * self.d
            total = mpmath.mpf(0)
            for k in _SEGMENT_ORDER:
                for g in SEGMENT_BASES[k]:
                    entries = _moment_entries(g, k, n, degree)[n]
                    total += mpmath.fsum(c * e for c, e in
                                         zip(self.polynomial(k, g), entries))
            return total

    def to_dict(self):
        with mpmath.workdps(self.dps):
            coeffs = [mpmath.nstr(c, self.dps, min_fixed=1, max_fixed=0)
                      if c else '0' for c in self.coefficients]
        return {
            'q': self.q, 'p': 4, 'dps': self.dps, 'method': self.method,
            'rank': self.rank, 'unknown_count': len(self.layout),
            'condition_estimate': self.condition_estimate,
            'held_out': [{'n': n, 'relative_error': e}
                         for n, e in self.held_out],
            'zeroed': self.zeroed,
            'unknowns': [{'segment': k, 'basis': g.name, 'power': nu,
                          'coefficient': c}
                         for (k, g, nu), c in zip(self.layout, coeffs)],
        }

    @classmethod
    def from_dict(cls, data):
        dps = int(data['dps'])
        with mpmath.workdps(dps):
            layout, coeffs = [], []
            for u in data['unknowns']:
                layout.append((int(u['segment']),
                               BasisFunction.from_name(u['basis']),
                               int(u['power'])))
                coeffs.append(mpmath.mpf(u['coefficient']))
        sol = cls(int(data['q']), dps, layout, coeffs,
                  float(data['condition_estimate']),
                  [(h['n'], h['relative_error']) for h in data['held_out']],
                  list(data['zeroed']), data.get('method', 'legendre'),
                  data.get('rank'))
        sol.pdf = _to_pdf(sol)
        return sol


def _to_pdf(sol):
    pieces = []
    for k in _SEGMENT_ORDER:
        terms = []
        for (kk, g, nu), c in zip(sol.layout, sol.coefficients):
            if kk == k and c != 0:
                terms.append(Term.from_value(c, nu, 'r', g))
        lo, hi = SEGMENTS[k]
        pieces.append(Piece(lo, hi, terms))
    return PiecewisePdf(BipartiteDims(4, sol.q), pieces,
                        label='moment solver 4xq (q=%d, %d digits)'
                        % (sol.q, sol.dps))


class SolutionCache:
    """JSON files of solved coefficients, keyed by ``q`` and precision."""

    def __init__(self, directory=None):
        if directory is None:
            directory = os.environ.get(CACHE_ENV)
        if directory is None:
            directory = Path.home() / '.cache' / 'puritydist'
        self.directory = Path(directory)

    def path(self, q, dps, method='legendre'):
        return self.directory / ('solve4xq_q%d_dps%d_%s.json'
                                 % (q, dps, method))

    def load(self, q, dps, method='legendre'):
        path = self.path(q, dps, method)
        if not path.exists():
            return None
        try:
            sol = Solution4xq.from_dict(json.loads(path.read_text()))
        except (ValueError, KeyError, TypeError) as exc:
            logger.warning('ignoring unreadable cache file %s: %s', path, exc)
            return None
        sol.from_cache = True
        return sol

    def store(self, sol):
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(sol.q, sol.dps,
                         'monomial' if sol.method == 'least-squares'
                         else sol.method)
        tmp = path.with_suffix('.tmp')
        tmp.write_text(json.dumps(sol.to_dict(), indent=1, sort_keys=True))
        tmp.replace(path)
        return path


def _numerical_zeros(x_hi, x_lo):
    """Indices whose high/low precision values share no leading digit."""
    out = []
    for i, (a, b) in enumerate(zip(x_hi, x_lo)):
        if a == 0 or abs(a - b) >= abs(a) / 1000:
            out.append(i)
    return out


def _held_out_residuals(layout, x, d, first, count):
    """Relative errors of ``<R^n>``, ``n = first .. first+count-1``."""
    if count <= 0:
        return []
    last = first + count - 1
    degree = 13 + 4 * d
    exact = purity_moments(BipartiteDims(4, 4 + d), last)
    blocks = {(k, g): _moment_entries(g, k, last, degree)
              for k in _SEGMENT_ORDER for g in SEGMENT_BASES[k]}
    out = []
    for n in range(first, last + 1):
        val = mpmath.fsum(c * blocks[(k, g)][n][nu]
                          for c, (k, g, nu) in zip(x, layout) if c)
        ref = mpmath.mpf(exact[n].numerator) / exact[n].denominator
        out.append((n, float(abs(val / ref - 1))))
    return out


_G_MAX = {BasisTag.ONE: 1, BasisTag.ATAN_SQRT_8R2_OVER_4R2_MINUS_1: 2,
          BasisTag.ATAN_SQRT_2_OVER_12R2_MINUS_3: 2,
          BasisTag.SQRT_4R2_MINUS_1: 2}


def _drop_negligible(layout, x, dps):
    """Zero coefficients whose largest term on their segment is below
    ``10**-(dps//2)`` of the segment's largest term (rank-truncation noise)."""
    size = [abs(c) * _segment_r_bounds(k)[1] ** nu * _G_MAX[g.tag]
            for c, (k, g, nu) in zip(x, layout)]
    top = {}
    for sz, (k, _, _) in zip(size, layout):
        top[k] = max(top.get(k, 0), sz)
    cut = mpmath.mpf(10) ** (-(dps // 2))
    return [mpmath.mpf(0) if sz < cut * top[k] else c
            for c, sz, (k, _, _) in zip(x, size, layout)]


def _solve_legendre(d, dps):
    n = unknown_count(d)
    system = assemble_system(d, dps, rows=n, moment_basis='legendre')
    with mpmath.workdps(dps):
        rank_tol = mpmath.mpf(10) ** (-(dps - RANK_GUARD))
        x, cond, rank = _gauss_full_pivot(system.matrix, system.rhs,
                                          rank_tol)
        x = _drop_negligible(system.layout, x, dps)
    zeroed = [i for i, v in enumerate(x) if v == 0]
    return system.layout, x, float(cond), rank, zeroed, 'legendre'


def _solve_monomial(d, dps, held_out):
    n = unknown_count(d)
    system = assemble_system(d, dps, rows=n + held_out,
                             moment_basis='monomial')
    square, rhs = system.matrix[:n], system.rhs[:n]
    method = 'monomial'
    with mpmath.workdps(dps):
        try:
            x, cond, rank = _gauss_full_pivot(square, rhs)
        except InsufficientPrecisionError:
            if held_out < 10:
                raise
            # consecutive moments singular here: overdetermined fallback
            logger.warning('square system singular at %d digits; using '
                           'least squares on %d rows', dps, n + held_out)
            method = 'least-squares'
            x, _ = _least_squares(system.matrix, system.rhs)
            cond, rank = float('inf'), None
    # same system at reduced precision: digits that do not survive are noise
    guard = max(15, dps // 5)
    with mpmath.workdps(dps - guard):
        try:
            x_lo, _, _ = _gauss_full_pivot(
                [[+v for v in row] for row in square], [+v for v in rhs])
        except InsufficientPrecisionError:
            raise InsufficientPrecisionError(
                'precision %d leaves no headroom for the monomial moment '
                'system of d=%d (condition estimate %s); increase dps'
                % (dps, d, mpmath.nstr(cond, 3)),
                condition_estimate=float(cond), dps=dps) from None
    if float(mpmath.log10(cond)) > dps - guard - 10:
        raise InsufficientPrecisionError(
            'condition estimate 1e%d exceeds what %d digits can resolve'
            % (int(mpmath.log10(cond)), dps),
            condition_estimate=float(cond), dps=dps)
    zeroed = _numerical_zeros(x, x_lo)
    with mpmath.workdps(dps):
        x = [mpmath.mpf(0) if i in set(zeroed) else v for i, v in enumerate(x)]
    return system.layout, x, float(cond), rank, zeroed, method


def solve_4xq(q, dps=None, held_out=10, cache=None, verify=True,
              moment_basis='legendre'):
    """Solve the moment system for a 4 x q density.

    Parameters
    ----------
    q : int
        Larger dimension, ``q >= 4``.
    dps : int, optional
        Working precision in decimal digits; :func:`default_precision` if
        omitted.
    held_out : int
        Number of moments ``<R^n>`` beyond those used in the fit that are
        checked against their exact values.
    cache : SolutionCache, optional
        Looked up first and filled after a successful solve.
    verify : bool
        Raise when a held-out moment misses its exact value by more than
        ``1e-8`` relative.
    moment_basis : {'legendre', 'monomial'}
        ``'legendre'`` fits shifted Legendre moments and truncates the
        elimination at the numerical rank, which works at 60 digits.
        ``'monomial'`` fits raw moments with a full-rank solve; that needs
        about ``1.25 * (168 + 48 d)`` digits, and coefficients that differ
        between the solve at ``dps`` and one at ``dps - dps//5`` are zeroed.

    Returns
    -------
    Solution4xq

    Raises
    ------
    InsufficientPrecisionError
        The system is beyond what ``dps`` digits resolve (monomial route), or
        the held-out check fails while the elimination was rank-truncated.
    VerificationError
        The held-out check fails for a full-rank solution.
    """
    if int(q) != q or q < 4:
        raise DomainError('the 4 x q solver needs an integer q >= 4')
    if moment_basis not in MOMENT_BASES:
        raise DomainError('moment_basis must be one of %s' % (MOMENT_BASES,))
    q = int(q)
    d = q - 4
    dps = default_precision(d, moment_basis) if dps is None else int(dps)
    if dps < 30:
        raise DomainError('working precision below 30 digits is meaningless')
    if cache is not None:
        sol = cache.load(q, dps, moment_basis)
        if sol is not None:
            logger.info('cache hit for q=%d at %d digits', q, dps)
            return sol
    start = time.perf_counter()
    n = unknown_count(d)
    if moment_basis == 'legendre':
        layout, x, cond, rank, zeroed, method = _solve_legendre(d, dps)
    else:
        layout, x, cond, rank, zeroed, method = _solve_monomial(d, dps,
                                                                held_out)
    with mpmath.workdps(dps):
        residuals = _held_out_residuals(layout, x, d, n, held_out)
    sol = Solution4xq(q, dps, layout, x, cond, residuals, zeroed, method,
                      rank, time.perf_counter() - start)
    worst = sol.max_held_out_error
    if verify and worst > HELD_OUT_TOL:
        msg = ('held-out moments of the 4x%d solution miss the exact values '
               'by %.3g relative (> %g) at %d digits'
               % (q, worst, HELD_OUT_TOL, dps))
        if rank is not None and rank < n:
            raise InsufficientPrecisionError(
                msg + '; numerical rank %d of %d, increase dps' % (rank, n),
                condition_estimate=cond, dps=dps)
        raise VerificationError(msg)
    sol.pdf = _to_pdf(sol)
    if cache is not None:
        cache.store(sol)
    return sol


def solve_pdf_4xq(q, dps=None, **kwargs):
    """:class:`PiecewisePdf` of the purity for ``4 x q`` from the moment solver."""
    return solve_4xq(q, dps, **kwargs).pdf


def ansatz_residual(q, extra=10, dps=None):
    """Residual norm of the row-scaled least-squares fit with ``extra`` rows.

    A value at the level of the working precision confirms that the exact
    density lies in the span of the ansatz.  Uses raw moments at the
    monomial default precision.
    """
    d = q - 4
    n = unknown_count(d)
    system = assemble_system(d, dps, rows=n + extra, moment_basis='monomial')
    with mpmath.workdps(system.dps):
        _, res = _least_squares(system.matrix, system.rhs)
        return +res
