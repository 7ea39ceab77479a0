"""Exact purity and linear-entropy densities of random bipartite pure states.

Closed forms cover ``2 x q``, ``3 x q`` and ``4 x 4``; ``4 x q`` densities
are rebuilt from exact moments by a high-precision linear solve, and a Monte
Carlo sampler checks both.
"""

from .basis import BasisFunction, BasisTag
from .closed_form import chi, pdf_2xq, pdf_3x3, pdf_3xq, pdf_4x4
from .errors import (DomainError, InsufficientPrecisionError, NumericalError,
                     PurityDistError, VerificationError)
from .families import SUPPORTED, formula_name, purity_pdf
from .model import (BipartiteDims, Piece, PiecewisePdf, Term, breakpoint_jumps,
                    cdf, cdf_many, eval_pdf, integrate_pdf,
                    linear_entropy_from_purity, linear_entropy_pdf_to_purity_pdf,
                    pdf_moment, pdf_to_linear_entropy_pdf,
                    purity_from_linear_entropy)
from .moments import compositions, purity_moment, purity_moments
from .sampling import (ValidationReport, joint_schmidt_density,
                       purity_of_state, sample_purities, sample_state,
                       schmidt_spectrum, validate)
from .solver import SolutionCache, solve_4xq, solve_pdf_4xq

__version__ = '0.1.0'
