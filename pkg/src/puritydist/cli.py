"""Command-line front end.

Subcommands ``pdf``, ``moments``, ``sample``, ``validate`` and ``solve4xq``
write CSV or JSON to standard output (or ``--out``).  Exit status is 0 when
every requested check passes, 1 when a statistical or verification check
fails, 2 for usage errors and 3 for numerical failures.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from decimal import Decimal, localcontext

import numpy as np

from .closed_form import pdf_4x4
from .errors import (DomainError, InsufficientPrecisionError, NumericalError,
                     VerificationError)
from .families import SUPPORTED, formula_name, is_supported, purity_pdf
from .model import BipartiteDims, eval_pdf, pdf_to_linear_entropy_pdf
from .moments import purity_moments
from .sampling import sample_purities, validate
from .solver import (CACHE_ENV, MOMENT_BASES, SolutionCache,
                     default_precision, solve_4xq)

__all__ = ['main', 'build_parser']

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

logger = logging.getLogger('puritydist')


class UsageError(Exception):
    pass


def fmt(x, digits=17):
    """Decimal string of a float with ``digits`` significant digits."""
    return '%.*g' % (digits, x)


def exact_decimal(frac, digits=17):
    """Correctly rounded decimal expansion of a rational."""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(frac.numerator) / Decimal(frac.denominator))


def _write(args, text):
    if args.out in (None, '-'):
        sys.stdout.write(text)
    else:
        with open(args.out, 'w', encoding='utf-8', newline='') as fh:
            fh.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator='\n')
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + '\n'


def _dims(p, q):
    if not is_supported(p, q):
        raise UsageError('unsupported dimensions %dx%d; supported: %s'
                         % (p, q, SUPPORTED))
    return BipartiteDims(p, q)


def _cache(args):
    if args.cache:
        return SolutionCache(args.cache)
    if CACHE_ENV in os.environ:
        return SolutionCache()
    return None


def _pdf(args, p, q):
    return purity_pdf(p, q, force_solver=args.force_solver,
                      dps=args.precision, cache=_cache(args))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_pdf(args):
    _dims(args.p, args.q)
    if (args.r is None) == (args.grid is None):
        raise UsageError('give exactly one of --r or --grid')
    pdf = _pdf(args, args.p, args.q)
    name = 'R'
    if args.variable == 'linear-entropy':
        pdf = pdf_to_linear_entropy_pdf(pdf)
        name = 'S_L'
    if args.grid is not None:
        if args.grid < 2:
            raise UsageError('--grid needs at least 2 points')
        lo, hi = pdf.support
        xs = np.linspace(lo, hi, args.grid)
    else:
        xs = np.array([args.r])
    vals = np.atleast_1d(eval_pdf(pdf, xs))
    source = formula_name(args.p, args.q, args.force_solver)
    d = args.digits
    if args.format == 'json':
        _write(args, _json({'p': args.p, 'q': args.q, 'variable': name,
                            'formula': source,
                            'rows': [{name: float(x), 'density': float(v)}
                                     for x, v in zip(xs, vals)]}))
    else:
        _write(args, _csv([name, 'density', 'formula'],
                          [(fmt(x, d), fmt(v, d), source)
                           for x, v in zip(xs, vals)]))
    return EXIT_OK


def cmd_moments(args):
    dims = _dims(args.p, args.q)
    if args.n_max < 0:
        raise UsageError('--n-max must be nonnegative')
    ms = purity_moments(dims, args.n_max)
    rows = [(n, '%d/%d' % (m.numerator, m.denominator),
             exact_decimal(m, args.digits)) for n, m in enumerate(ms)]
    if args.format == 'json':
        _write(args, _json({'p': args.p, 'q': args.q, 'moments': [
            {'n': n, 'fraction': f, 'decimal': v} for n, f, v in rows]}))
    else:
        _write(args, _csv(['n', 'fraction', 'decimal'], rows))
    return EXIT_OK


def cmd_sample(args):
    dims = _dims(args.p, args.q)
    if args.count < 1:
        raise UsageError('--count must be at least 1')
    xs = sample_purities(dims, args.count, args.seed, args.workers)
    if args.format == 'json':
        _write(args, _json({'p': args.p, 'q': args.q, 'seed': args.seed,
                            'purity': [float(x) for x in xs]}))
    else:
        _write(args, _csv(['purity'], [(fmt(x, args.digits),) for x in xs]))
    return EXIT_OK


def cmd_validate(args):
    dims = _dims(args.p, args.q)
    pp = args.pdf_p if args.pdf_p is not None else args.p
    pq = args.pdf_q if args.pdf_q is not None else args.q
    if (pp, pq) != (args.p, args.q) and not args.allow_mismatch:
        raise UsageError('density %dx%d differs from the sampled %dx%d; '
                         'pass --allow-mismatch for a negative control'
                         % (pp, pq, args.p, args.q))
    _dims(pp, pq)
    pdf = _pdf(args, pp, pq)
    try:
        report = validate(dims, pdf, args.count, bin_count=args.bins,
                          seed=args.seed, alpha=args.alpha,
                          workers=args.workers,
                          allow_mismatch=args.allow_mismatch)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    out = report.to_dict()
    out['formula'] = formula_name(pp, pq, args.force_solver)
    _write(args, _json(out))
    return EXIT_OK if report.passed else EXIT_FAIL


def _closed_form_deviation(pdf, points=300):
    xs = np.linspace(0.25, 1.0, points)
    return float(np.max(np.abs(eval_pdf(pdf, xs) - eval_pdf(pdf_4x4(), xs))))


def cmd_solve4xq(args):
    if args.q < 4:
        raise UsageError('solve4xq needs --q >= 4')
    dps = args.precision or default_precision(args.q - 4, args.moment_basis)
    sol = solve_4xq(args.q, dps, held_out=args.held_out, cache=_cache(args),
                    moment_basis=args.moment_basis)
    if sol.from_cache:
        print('cache hit: q=%d at %d digits' % (sol.q, sol.dps),
              file=sys.stderr)
    else:
        print('solved q=%d at %d digits in %.1f s'
              % (sol.q, sol.dps, sol.seconds), file=sys.stderr)
    out = sol.to_dict()
    out['max_held_out_error'] = sol.max_held_out_error
    if sol.q == 4:
        out['max_deviation_from_closed_form'] = _closed_form_deviation(sol.pdf)
    _write(args, _json(out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=('csv', 'json'), default='csv')
    common.add_argument('--out', help='output file (default: stdout)')
    common.add_argument('--digits', type=int, default=17,
                        help='significant digits of decimal output')
    common.add_argument('-v', '--verbose', action='store_true')

    dims = argparse.ArgumentParser(add_help=False)
    dims.add_argument('--p', type=int, required=True)
    dims.add_argument('--q', type=int, required=True)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument('--precision', type=int, default=None,
                        help='working digits of the 4xq solver')
    solver.add_argument('--cache', default=None,
                        help='solver cache directory (default: $%s)'
                        % CACHE_ENV)
    solver.add_argument('--force-solver', action='store_true',
                        help='use the moment solver for 4x4 as well')

    ap = argparse.ArgumentParser(
        prog='puritydist',
        description='Purity densities of random bipartite pure states.')
    sub = ap.add_subparsers(dest='command', required=True)

    sp = sub.add_parser('pdf', parents=[common, dims, solver],
                        help='tabulate the density')
    sp.add_argument('--r', type=float, default=None,
                    help='single abscissa in the chosen variable')
    sp.add_argument('--grid', type=int, default=None,
                    help='number of evenly spaced points over the support')
    sp.add_argument('--variable', choices=('purity', 'linear-entropy'),
                    default='purity')
    sp.set_defaults(func=cmd_pdf)

    sp = sub.add_parser('moments', parents=[common, dims],
                        help='exact purity moments')
    sp.add_argument('--n-max', type=int, default=6)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser('sample', parents=[common, dims],
                        help='Monte Carlo purities')
    sp.add_argument('--count', type=int, required=True)
    sp.add_argument('--seed', type=int, default=0)
    sp.add_argument('--workers', type=int, default=1)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser('validate', parents=[common, dims, solver],
                        help='Monte Carlo check of a density (JSON report)')
    sp.add_argument('--count', type=int, default=100000)
    sp.add_argument('--bins', type=int, default=200)
    sp.add_argument('--seed', type=int, default=0)
    sp.add_argument('--alpha', type=float, default=0.001)
    sp.add_argument('--workers', type=int, default=1)
    sp.add_argument('--pdf-p', type=int, default=None,
                    help='dimensions of the density tested (default: --p)')
    sp.add_argument('--pdf-q', type=int, default=None)
    sp.add_argument('--allow-mismatch', action='store_true',
                    help='permit a density for other dimensions')
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser('solve4xq', parents=[common, solver],
                        help='moment solver for 4 x q (JSON)')
    sp.add_argument('--q', type=int, required=True)
    sp.add_argument('--held-out', type=int, default=10)
    sp.add_argument('--moment-basis', choices=MOMENT_BASES,
                    default='legendre',
                    help='fit Legendre moments (rank-truncated, default) '
                    'or raw moments (full rank, needs ~250+ digits)')
    sp.set_defaults(func=cmd_solve4xq)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print('error: %s' % exc, file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print('error: %s' % exc, file=sys.stderr)
        return EXIT_USAGE
    except VerificationError as exc:
        print('verification failed: %s' % exc, file=sys.stderr)
        return EXIT_FAIL
    except InsufficientPrecisionError as exc:
        print('insufficient precision: %s' % exc, file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        print('numerical error: %s' % exc, file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
