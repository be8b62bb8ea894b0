"""
Sensitivity distributions of the scalar mixture-of-Gaussians dominating pairs.

Poisson sampling of a group of ``k`` examples yields a Binom(k, q) sensitivity;
fixed-size batches yield twice a Hypergeom(B, n + k, k) sensitivity. Both PMFs
are built in log-space from the ratio of consecutive terms and normalized with
a log-sum-exp, so large groups, large populations and tiny sampling rates
neither underflow nor pick up log-gamma cancellation error.

Example:
    >>> binomial_sensitivities(2, 0.5).as_dict()
    {0.0: 0.25, 1.0: 0.5, 2.0: 0.25}
"""

import logging
import math

import numpy as np
from scipy import special

from .constants import NORMALIZATION_TOLERANCE
from .errors import DomainError, NumericalError
from .types import SensitivitySpec

logger = logging.getLogger(__name__)


def _log_pmf_from_ratios(log_ratios: np.ndarray) -> np.ndarray:
    """Normalized log-PMF whose consecutive terms differ by ``log_ratios``."""
    log_pmf = np.concatenate(([0.0], np.cumsum(log_ratios)))
    return log_pmf - special.logsumexp(log_pmf)


def _spec_from_log_pmf(sensitivities: np.ndarray, log_pmf: np.ndarray) -> SensitivitySpec:
    """Exponentiate a log-PMF, drop exact zeros and renormalize tiny drift."""
    pmf = np.exp(log_pmf)
    keep = pmf > 0
    sensitivities, pmf = sensitivities[keep], pmf[keep]

    total = math.fsum(pmf)
    drift = abs(total - 1.0)
    if drift >= NORMALIZATION_TOLERANCE:
        raise NumericalError(f"Sensitivity PMF sums to {total!r}")
    if drift > 0:
        logger.debug("Renormalizing sensitivity PMF (drift %.3e)", drift)
        pmf = pmf / total

    return SensitivitySpec(tuple(float(c) for c in sensitivities), tuple(float(p) for p in pmf))


def binomial_sensitivities(k: int, q: float) -> SensitivitySpec:
    """
    Sensitivity distribution Binom(k, q) for Poisson sampling.

    Args:
        k: Group size (0 gives a point mass at sensitivity 0)
        q: Poisson sampling probability

    Returns:
        SensitivitySpec: entries (m, C(k, m) q^m (1 - q)^(k - m)) for m = 0..k

    Raises:
        DomainError: If k is negative or q lies outside [0, 1]

    Examples:
        >>> binomial_sensitivities(5, 0.0).as_dict()
        {0.0: 1.0}
    """
    if k < 0:
        raise DomainError(f"Group size must be nonnegative: {k}")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"Sampling probability must be in [0, 1]: {q}")
    if k == 0 or q == 0.0:
        return SensitivitySpec.point_mass(0.0)
    if q == 1.0:
        return SensitivitySpec.point_mass(float(k))

    m = np.arange(k, dtype=float)
    # Pr[m + 1] / Pr[m] = (k - m) / (m + 1) * q / (1 - q)
    log_ratios = np.log(k - m) - np.log(m + 1) + (math.log(q) - math.log1p(-q))
    spec = _spec_from_log_pmf(np.arange(k + 1, dtype=float), _log_pmf_from_ratios(log_ratios))
    logger.debug("Binomial sensitivities k=%d q=%g: %d support points", k, q, len(spec.sensitivities))
    return spec


def hypergeometric_sensitivities(B: int, n: int, k: int) -> SensitivitySpec:
    """
    Sensitivity distribution 2 * Hypergeom(B, n + k, k) for fixed-size batches.

    The count of group members drawn into a batch of ``B`` out of ``n + k``
    examples is hypergeometric; each swapped-in member moves the gradient sum
    by at most 2, hence the doubled sensitivities.

    Args:
        B: Batch size
        n: Number of examples outside the group
        k: Group size

    Returns:
        SensitivitySpec: entries (2m, Pr[Hypergeom(B, n + k, k) = m])

    Raises:
        DomainError: If B is not in [1, n + k] or n, k are negative
    """
    if B <= 0:
        raise DomainError(f"Batch size must be positive: {B}")
    if n < 0 or k < 0:
        raise DomainError(f"Population sizes must be nonnegative: n={n}, k={k}")
    if B > n + k:
        raise DomainError(f"Batch size {B} exceeds population size {n + k}")

    lo, hi = max(0, B - n), min(k, B)
    if lo == hi:
        return SensitivitySpec.point_mass(2.0 * lo)

    m = np.arange(lo, hi, dtype=float)
    # Pr[m + 1] / Pr[m] = (k - m)(B - m) / ((m + 1)(n - B + m + 1))
    log_ratios = np.log(k - m) + np.log(B - m) - np.log(m + 1) - np.log(n - B + m + 1)
    support = 2.0 * np.arange(lo, hi + 1, dtype=float)
    spec = _spec_from_log_pmf(support, _log_pmf_from_ratios(log_ratios))
    logger.debug(
        "Hypergeometric sensitivities B=%d n=%d k=%d: %d support points",
        B, n, k, len(spec.sensitivities),
    )
    return spec
