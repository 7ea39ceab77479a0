"""Monte Carlo ground truth from Haar-random bipartite pure states.

Random states are vectors of ``p*q`` independent standard complex Gaussians
scaled to unit norm, which is the unitarily invariant distribution on the
sphere.

Reproducibility
---------------
Samples are drawn in chunks of :data:`CHUNK` states.  Chunk ``i`` uses the
generator ``numpy.random.Generator(PCG64(SeedSequence(seed).spawn(...)[i]))``
and draws the real parts then the imaginary parts with
``standard_normal`` (numpy's ziggurat sampler).  The chunk layout does not
depend on the number of workers, so a given ``(seed, count)`` always yields
the same purities bit for bit.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, NumericalError
from .model import BipartiteDims, cdf_many
from .moments import purity_moment, schmidt_normalization

__all__ = ['CHUNK', 'sample_state', 'sample_states', 'schmidt_spectrum',
           'purity_of_state', 'joint_schmidt_density', 'sample_purities',
           'ks_threshold', 'ks_statistic', 'MomentDelta', 'ValidationReport',
           'validate', 'MIN_VALIDATION_SAMPLES']

CHUNK = 1 << 16
MIN_VALIDATION_SAMPLES = 1000


def _dims(dims):
    return dims if isinstance(dims, BipartiteDims) else BipartiteDims(*dims)


def _gaussian_states(rng, count, p, q):
    re = rng.standard_normal((count, p, q))
    im = rng.standard_normal((count, p, q))
    m = re + 1j * im
    norm = np.sqrt(np.sum(re * re + im * im, axis=(1, 2)))
    bad = norm == 0
    while np.any(bad):
        # probability zero, kept for completeness
        k = int(bad.sum())
        m[bad] = (rng.standard_normal((k, p, q))
                  + 1j * rng.standard_normal((k, p, q)))
        norm[bad] = np.sqrt(np.sum(np.abs(m[bad]) ** 2, axis=(1, 2)))
        bad = norm == 0
    return m / norm[:, None, None]


def sample_state(dims, rng):
    """One random state as a flat array of ``p*q`` amplitudes."""
    dims = _dims(dims)
    return _gaussian_states(rng, 1, dims.p, dims.q).reshape(dims.p * dims.q)


def sample_states(dims, count, rng):
    """``count`` random states, shape ``(count, p*q)``."""
    dims = _dims(dims)
    m = _gaussian_states(rng, count, dims.p, dims.q)
    return m.reshape(count, dims.p * dims.q)


def _coefficient_matrix(psi, dims):
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[-1] != dims.p * dims.q:
        raise DomainError('state has %d amplitudes, expected p*q = %d'
                          % (psi.shape[-1], dims.p * dims.q))
    return psi.reshape(psi.shape[:-1] + (dims.p, dims.q))


def _gram(m):
    # reduced density matrix on the p-dimensional factor
    return m @ np.conj(np.swapaxes(m, -1, -2))


def schmidt_spectrum(psi, dims):
    """Schmidt coefficients in descending order (eigenvalues of ``M M^+``).

    Accepts one state ``(p*q,)`` or a batch ``(n, p*q)``.
    """
    dims = _dims(dims)
    g = _gram(_coefficient_matrix(psi, dims))
    try:
        x = np.linalg.eigvalsh(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalError('eigensolver failed: %s' % exc) from exc
    x = np.clip(x, 0.0, None)
    return x[..., ::-1]


def purity_of_state(psi, dims, method='trace'):
    """Purity ``sum x_i**2``.

    ``method='trace'`` computes ``tr (M M^+)^2`` as the squared Frobenius
    norm of the p x p Gram matrix; ``method='spectrum'`` sums the squared
    Schmidt coefficients.
    """
    dims = _dims(dims)
    if method == 'trace':
        g = _gram(_coefficient_matrix(psi, dims))
        out = np.sum(np.abs(g) ** 2, axis=(-1, -2))
    elif method == 'spectrum':
        out = np.sum(schmidt_spectrum(psi, dims) ** 2, axis=-1)
    else:
        raise DomainError('method must be "trace" or "spectrum"')
    return float(out) if np.ndim(out) == 0 else out


def joint_schmidt_density(x, dims):
    """Joint density of the Schmidt coefficients on the simplex.

    ``A * prod_{i<j} (x_i - x_j)**2 * prod_i x_i**(q-p)``
    """
    dims = _dims(dims)
    x = np.asarray(x, dtype=float)
    if x.shape != (dims.p,):
        raise DomainError('need p = %d Schmidt coefficients' % dims.p)
    if np.any(x < 0) or abs(x.sum() - 1.0) > 1e-12:
        raise DomainError('point is off the probability simplex')
    vdm = 1.0
    for i in range(dims.p):
        for j in range(i + 1, dims.p):
            vdm *= (x[i] - x[j]) ** 2
    return float(schmidt_normalization(dims)) * vdm * np.prod(x ** dims.d)


# ---------------------------------------------------------------------------
# bulk sampling
# ---------------------------------------------------------------------------

def _chunk_purities(seed_seq, size, p, q):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    m = _gaussian_states(rng, size, p, q)
    g = _gram(m)
    return np.sum(np.abs(g) ** 2, axis=(-1, -2))


def sample_purities(dims, count, seed=0, workers=1):
    """Purities of ``count`` random states, deterministic in ``seed``."""
    dims = _dims(dims)
    if count < 1:
        raise DomainError('count must be positive')
    n_chunks = -(-count // CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(CHUNK, count - i * CHUNK) for i in range(n_chunks)]
    jobs = list(zip(children, sizes))
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(
                lambda job: _chunk_purities(job[0], job[1], dims.p, dims.q),
                jobs))
    else:
        parts = [_chunk_purities(s, n, dims.p, dims.q) for s, n in jobs]
    return np.concatenate(parts)


# ---------------------------------------------------------------------------
# goodness of fit
# ---------------------------------------------------------------------------

def ks_threshold(n, alpha=0.001):
    """Asymptotic Kolmogorov-Smirnov critical value ``c(alpha)/sqrt(n)``."""
    if not 0 < alpha < 1:
        raise DomainError('alpha must lie in (0, 1)')
    return float(special.kolmogi(alpha)) / np.sqrt(n)


def ks_statistic(samples, cdf_values):
    """One-sample KS distance given samples and the model CDF at them."""
    order = np.argsort(samples, kind='stable')
    f = np.asarray(cdf_values)[order]
    n = len(f)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


@dataclass
class MomentDelta:
    n: int
    empirical: float
    exact: str
    exact_value: float
    standard_error: float

    @property
    def delta(self):
        return self.empirical - self.exact_value

    @property
    def within(self):
        return abs(self.delta) <= 5 * self.standard_error


@dataclass
class ValidationReport:
    """Empirical purities against an analytic density."""

    p: int
    q: int
    pdf_label: str
    seed: int
    sample_count: int
    alpha: float
    ks_statistic: float
    ks_threshold: float
    moment_deltas: list
    bin_edges: list
    counts: list
    passed: bool = field(default=False)

    def to_dict(self):
        out = asdict(self)
        out['pass'] = out.pop('passed')
        for m, md in zip(out['moment_deltas'], self.moment_deltas):
            m['delta'] = md.delta
            m['within_5_sigma'] = md.within
        return out

    def to_json(self, **kwargs):
        kwargs.setdefault('sort_keys', True)
        return json.dumps(self.to_dict(), **kwargs)


def validate(dims, pdf, sample_count, bin_count=200, seed=0, alpha=0.001,
             workers=1, orders=(1, 2, 3), samples=None,
             allow_mismatch=False):
    """Compare Monte Carlo purities with ``pdf``.

    Samples are drawn for ``dims``; the exact moments are those of
    ``pdf.dims``.  A density for other dimensions is refused unless
    ``allow_mismatch`` is set, in which case it is expected to fail (negative
    control).  Passing requires the KS distance below the asymptotic
    critical value at ``alpha`` and every moment within five standard errors.
    """
    dims = _dims(dims)
    if pdf.variable != 'purity':
        raise DomainError('validate expects a purity density')
    if pdf.dims != dims and not allow_mismatch:
        raise DomainError('density is for %dx%d but samples are %dx%d'
                          % (pdf.dims.p, pdf.dims.q, dims.p, dims.q))
    if samples is None:
        if sample_count < MIN_VALIDATION_SAMPLES:
            raise DomainError('at least %d samples are needed, got %d'
                              % (MIN_VALIDATION_SAMPLES, sample_count))
        samples = sample_purities(dims, sample_count, seed, workers)
    else:
        samples = np.asarray(samples, dtype=float)
        sample_count = len(samples)
    n = len(samples)
    ks = ks_statistic(samples, cdf_many(pdf, samples))
    thr = ks_threshold(n, alpha)
    deltas = []
    for k in orders:
        v = samples ** k
        exact = purity_moment(pdf.dims, k)
        deltas.append(MomentDelta(k, float(v.mean()), '%d/%d' % (
            exact.numerator, exact.denominator), float(exact),
            float(v.std(ddof=1) / np.sqrt(n))))
    counts, edges = np.histogram(samples, bins=bin_count,
                                 range=(1.0 / dims.p, 1.0))
    passed = ks <= thr and all(md.within for md in deltas)
    return ValidationReport(dims.p, dims.q, pdf.label, int(seed), n, alpha,
                            ks, thr, deltas, edges.tolist(), counts.tolist(),
                            bool(passed))
