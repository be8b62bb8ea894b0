"""
Self-composition of discretized privacy-loss distributions.

Independent losses add, so the PLD of a composition is the convolution of the
PMFs. T-fold composition uses exponentiation by squaring; after each
convolution, negligible tails are cut pessimistically (upper tail into the
infinity mass, lower tail onto the lowest retained loss).
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import signal

from .constants import (
    CONVOLUTION_DRIFT_TOLERANCE,
    DEFAULT_TRUNCATION_MASS,
    FFT_CLAMP_FLOOR,
    FFT_SIZE_THRESHOLD,
)
from .errors import DomainError, NumericalError
from .types import DiscretePld

logger = logging.getLogger(__name__)


def _convolve_pmfs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    expected = float(a.sum()) * float(b.sum())
    if min(a.size, b.size) < FFT_SIZE_THRESHOLD:
        return np.convolve(a, b)

    pmf = signal.fftconvolve(a, b)
    if np.any(pmf < -FFT_CLAMP_FLOOR):
        logger.debug("FFT ringing below -%g clamped", FFT_CLAMP_FLOOR)
    np.clip(pmf, 0.0, None, out=pmf)
    total = float(pmf.sum())
    drift = abs(total - expected)
    if drift >= CONVOLUTION_DRIFT_TOLERANCE:
        raise NumericalError(f"Convolution drifted by {drift:.3e}")
    if drift > 0 and total > 0:
        pmf *= expected / total
    return pmf


def convolve(a: DiscretePld, b: DiscretePld) -> DiscretePld:
    """
    PLD of the composition of two mechanisms.

    Args:
        a: First PLD
        b: Second PLD, on the same grid and in the same direction

    Returns:
        DiscretePld: pmf is the convolution, min indices add, and the infinity
        mass is 1 - (1 - a.infinity_mass)(1 - b.infinity_mass)

    Raises:
        DomainError: If grid spacings or directions differ
    """
    if not math.isclose(a.grid_spacing, b.grid_spacing, rel_tol=1e-12, abs_tol=0.0):
        raise DomainError(f"Grid spacings differ: {a.grid_spacing} vs {b.grid_spacing}")
    if a.direction is not b.direction:
        raise DomainError(f"Directions differ: {a.direction.value} vs {b.direction.value}")

    infinity_mass = 1.0 - (1.0 - a.infinity_mass) * (1.0 - b.infinity_mass)
    return DiscretePld(
        grid_spacing=a.grid_spacing,
        min_loss_index=a.min_loss_index + b.min_loss_index,
        pmf=_convolve_pmfs(a.pmf, b.pmf),
        infinity_mass=infinity_mass,
        direction=a.direction,
        pessimistic=a.pessimistic and b.pessimistic,
    )


def truncate_tails(pld: DiscretePld, truncation_mass: float) -> DiscretePld:
    """Cut tails lighter than ``truncation_mass`` without lowering any loss.

    The upper tail moves into the infinity mass; the lower tail is added to the
    smallest retained grid point.
    """
    if truncation_mass <= 0 or pld.pmf.size <= 1:
        return pld

    pmf = pld.pmf
    lower_cumulative = np.cumsum(pmf)
    upper_cumulative = np.cumsum(pmf[::-1])[::-1]
    # First index whose cumulative mass reaches the threshold is retained.
    first = int(np.searchsorted(lower_cumulative, truncation_mass, side="left"))
    last = pmf.size - 1 - int(np.searchsorted(upper_cumulative[::-1], truncation_mass, side="left"))
    first = min(first, pmf.size - 1)
    last = max(last, first)

    dropped_low = float(lower_cumulative[first - 1]) if first > 0 else 0.0
    dropped_high = float(upper_cumulative[last + 1]) if last + 1 < pmf.size else 0.0

    trimmed = pmf[first:last + 1].copy()
    trimmed[0] += dropped_low
    return DiscretePld(
        grid_spacing=pld.grid_spacing,
        min_loss_index=pld.min_loss_index + first,
        pmf=trimmed,
        infinity_mass=pld.infinity_mass + dropped_high,
        direction=pld.direction,
        pessimistic=pld.pessimistic,
    )


def self_compose(
    pld: DiscretePld,
    rounds: int,
    truncation_mass: float = DEFAULT_TRUNCATION_MASS,
) -> DiscretePld:
    """
    PLD of ``rounds`` independent runs of the same mechanism.

    Exponentiation by squaring needs O(log rounds) convolutions; each result is
    passed through truncate_tails.

    Args:
        pld: Single-round PLD
        rounds: Number of compositions T (>= 1)
        truncation_mass: Tail mass that may be cut after each convolution

    Returns:
        DiscretePld: the T-fold composition

    Raises:
        DomainError: If rounds < 1
    """
    if rounds < 1:
        raise DomainError(f"Number of rounds must be at least 1: {rounds}")

    result: Optional[DiscretePld] = None
    base = pld
    remaining = int(rounds)
    convolutions = 0
    while remaining:
        if remaining & 1:
            if result is None:
                result = base
            else:
                result = truncate_tails(convolve(result, base), truncation_mass)
                convolutions += 1
        remaining >>= 1
        if remaining:
            base = truncate_tails(convolve(base, base), truncation_mass)
            convolutions += 1

    assert result is not None
    logger.debug(
        "Composed %s PLD %d times with %d convolutions",
        pld.direction.value, rounds, convolutions,
        extra={"rounds": rounds, "grid_points": result.pmf.size, "infinity_mass": result.infinity_mass},
    )
    return result.validate()
