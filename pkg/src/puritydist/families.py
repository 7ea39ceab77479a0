"""Dispatch from ``(p, q)`` to the density implementation."""

from .closed_form import pdf_2xq, pdf_3x3, pdf_3xq, pdf_4x4
from .errors import DomainError
from .model import BipartiteDims
from .solver import solve_pdf_4xq

__all__ = ['SUPPORTED', 'is_supported', 'formula_name', 'purity_pdf']

SUPPORTED = 'p=2 with q>=2; p=3 with q>=3; p=4 with q>=4'


def is_supported(p, q):
    return (p in (2, 3, 4) and int(q) == q and q >= p)


def formula_name(p, q, force_solver=False):
    """Short provenance tag of the implementation used for ``(p, q)``."""
    if not is_supported(p, q):
        raise DomainError('unsupported dimensions %sx%s; supported: %s'
                          % (p, q, SUPPORTED))
    if p == 2:
        return 'closed-2xq'
    if p == 3:
        return 'closed-3x3' if q == 3 else 'closed-3xq'
    if q == 4 and not force_solver:
        return 'closed-4x4'
    return 'solver-4xq'


def purity_pdf(p, q, force_solver=False, dps=None, cache=None):
    """Purity density for a ``p x q`` bipartition.

    ``4 x 4`` uses the closed form unless ``force_solver`` is set; larger
    ``q`` at ``p = 4`` always goes through the moment solver, with ``dps``
    and ``cache`` passed on.
    """
    name = formula_name(p, q, force_solver)
    BipartiteDims(p, q)
    if name == 'closed-2xq':
        return pdf_2xq(q)
    if name == 'closed-3x3':
        return pdf_3x3()
    if name == 'closed-3xq':
        return pdf_3xq(q)
    if name == 'closed-4x4':
        return pdf_4x4()
    return solve_pdf_4xq(q, dps, cache=cache)
