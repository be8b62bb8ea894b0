"""
Privacy-loss distributions of scalar mixture-of-Gaussians mechanisms.

Under the add direction the pair is ``P = N(0, s^2)`` against the mixture
``Q = sum_i p_i N(c_i, s^2)``; under remove the pair is reversed. The loss
``ln P(x)/Q(x)`` is monotone in ``x``, so its CDF is a Gaussian (or Gaussian
mixture) CDF evaluated at the inverted loss. Discretization rounds every loss
up to the next grid point, which can only increase delta(epsilon).

Example:
    >>> spec = SensitivitySpec.from_mapping({1.0: 1.0})
    >>> pld = mog_pld(spec, sigma=1.0, direction=Direction.ADD)
    >>> round(delta_for_epsilon(pld, 0.0), 3)
    0.383
"""

import logging
import math
from typing import Tuple, Union

import numpy as np
from scipy import optimize, special

from .constants import (
    DEFAULT_GRID_SPACING,
    DEFAULT_TAIL_MASS,
    EPSILON_TOLERANCE,
    LOSS_TOLERANCE,
    MAX_BISECTION_STEPS,
    UPPER_TAIL_SHARE,
)
from .errors import DomainError, NumericalError
from .types import DiscretePld, Direction, SensitivitySpec

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _log_probabilities(spec: SensitivitySpec) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(spec.probabilities, dtype=float))


def _add_loss(x: np.ndarray, spec: SensitivitySpec, sigma: float) -> np.ndarray:
    """-ln sum_i p_i exp((2 c_i x - c_i^2) / (2 sigma^2)), broadcast over x."""
    c = np.asarray(spec.sensitivities, dtype=float)
    exponents = (2.0 * np.multiply.outer(x, c) - c ** 2) / (2.0 * sigma ** 2)
    return -special.logsumexp(exponents + _log_probabilities(spec), axis=-1)


def privacy_loss(
    x: ArrayLike,
    spec: SensitivitySpec,
    sigma: float,
    direction: Direction,
) -> ArrayLike:
    """
    Privacy loss of the MoG pair at output ``x``.

    Args:
        x: Output value(s)
        spec: Sensitivity distribution
        sigma: Gaussian standard deviation
        direction: Adjacency direction

    Returns:
        The loss, nonincreasing in x for ADD and nondecreasing for REMOVE.
        Scalar input gives a float.

    Examples:
        >>> privacy_loss(0.0, SensitivitySpec.from_mapping({1.0: 1.0}), 1.0, Direction.ADD)
        0.5
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive: {sigma}")
    values = _add_loss(np.asarray(x, dtype=float), spec, sigma)
    if direction is Direction.REMOVE:
        values = -values
    return float(values) if np.ndim(values) == 0 else values


def _add_loss_brackets(target: np.ndarray, spec: SensitivitySpec, sigma: float):
    """Closed-form single-component brackets for the add-direction inverse.

    The largest sensitivity gives a point whose loss is <= target, the smallest
    positive sensitivity (with the zero component folded in) one whose loss is
    >= target.
    """
    c_max = spec.max_sensitivity
    p_max = spec.max_sensitivity_probability
    variance = sigma ** 2
    right = (2.0 * variance * (-math.log(p_max) - target) + c_max ** 2) / (2.0 * c_max)

    c_min = spec.min_positive_sensitivity
    p0 = spec.zero_mass
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        exponent = -target + np.log1p(-p0 * np.exp(target)) - math.log1p(-p0)
    left = np.minimum((2.0 * variance * exponent + c_min ** 2) / (2.0 * c_min), 0.0)
    return np.minimum(left, right), np.maximum(left, right)


def invert_loss(
    t: ArrayLike,
    spec: SensitivitySpec,
    sigma: float,
    direction: Direction,
) -> ArrayLike:
    """
    Output value whose privacy loss equals ``t``.

    Bisection on the closed-form brackets; every entry of ``t`` is solved
    simultaneously. Losses outside the attainable range map to -inf (the add
    loss never exceeds -ln p_0 when p_0 = Pr[c = 0] > 0) or +inf.

    Args:
        t: Target loss value(s)
        spec: Sensitivity distribution with some positive sensitivity
        sigma: Gaussian standard deviation
        direction: Adjacency direction

    Returns:
        x with privacy_loss(x) = t within LOSS_TOLERANCE.

    Raises:
        DomainError: If every sensitivity is 0 (the loss is constant)
    """
    if spec.is_constant:
        raise DomainError("Privacy loss is constant for an all-zero sensitivity spec")
    if sigma <= 0:
        raise DomainError(f"sigma must be positive: {sigma}")

    t_arr = np.asarray(t, dtype=float)
    target = np.atleast_1d(t_arr if direction is Direction.ADD else -t_arr).astype(float)

    p0 = spec.zero_mass
    supremum = -math.log(p0) if p0 > 0 else math.inf
    result = np.empty_like(target)
    above = target >= supremum
    below = target == -math.inf
    result[above] = -math.inf
    result[below] = math.inf
    solve = ~(above | below)

    goal = target[solve]
    if goal.size:
        lo, hi = _add_loss_brackets(goal, spec, sigma)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise NumericalError("Failed to bracket the privacy-loss inverse")
        mid = 0.5 * (lo + hi)
        for step in range(MAX_BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            value = _add_loss(mid, spec, sigma)
            converged = np.abs(value - goal) <= LOSS_TOLERANCE
            collapsed = (hi - lo) <= 4.0 * np.spacing(np.abs(mid) + 1.0)
            if np.all(converged | collapsed):
                break
            # Loss decreases in x: too-high loss means x is too small.
            move_up = value > goal
            lo = np.where(move_up, mid, lo)
            hi = np.where(move_up, hi, mid)
        logger.debug("Inverted %d loss values in %d bisection steps", goal.size, step + 1)
        result[solve] = mid

    return float(result[0]) if t_arr.ndim == 0 else result


def _loss_cdf(x: np.ndarray, spec: SensitivitySpec, sigma: float, direction: Direction) -> np.ndarray:
    """Pr[L <= t] given x = invert_loss(t)."""
    if direction is Direction.ADD:
        return special.ndtr(-x / sigma)
    c, p = spec.arrays()
    return special.ndtr((np.subtract.outer(x, c)) / sigma) @ p


def _loss_sf(x: np.ndarray, spec: SensitivitySpec, sigma: float, direction: Direction) -> np.ndarray:
    """Pr[L > t] given x = invert_loss(t)."""
    if direction is Direction.ADD:
        return special.ndtr(x / sigma)
    c, p = spec.arrays()
    return special.ndtr((np.subtract.outer(c, x)).T / sigma) @ p


def _mixture_upper_quantile(spec: SensitivitySpec, sigma: float, mass: float) -> float:
    """Smallest x with Pr_{x ~ mixture}[X > x] <= mass."""
    c, p = spec.arrays()
    z = -special.ndtri(mass)
    log_mass = math.log(mass)

    def log_tail(x: float) -> float:
        return float(special.logsumexp(special.log_ndtr((c - x) / sigma), b=p)) - log_mass

    lower, upper = sigma * z, spec.max_sensitivity + sigma * z
    if log_tail(lower) <= 0:
        return lower
    return optimize.brentq(log_tail, lower, upper, xtol=1e-12)


def loss_range(
    spec: SensitivitySpec,
    sigma: float,
    direction: Direction,
    tail_mass: float,
    upper_share: float = UPPER_TAIL_SHARE,
) -> Tuple[float, float]:
    """
    Loss interval holding all but ``tail_mass`` of the loss distribution.

    At most ``upper_share * tail_mass`` lies above the interval and the rest
    of the budget below it. Mass above becomes infinity mass, which every
    delta(epsilon) pays in full, while mass below only moves up to the lowest
    grid point. For the add direction with p_0 > 0 the upper end is the
    supremum -ln p_0, so nothing lies above.
    """
    upper_tail = upper_share * tail_mass
    z_lower = -special.ndtri(tail_mass - upper_tail)
    z_upper = -special.ndtri(upper_tail)
    if direction is Direction.ADD:
        # The add loss decreases in x.
        x_low, x_high = -sigma * z_upper, sigma * z_lower
        p0 = spec.zero_mass
        t_high = -math.log(p0) if p0 > 0 else privacy_loss(x_low, spec, sigma, direction)
        t_low = privacy_loss(x_high, spec, sigma, direction)
    else:
        x_low = -sigma * z_lower
        x_high = _mixture_upper_quantile(spec, sigma, upper_tail)
        t_low = privacy_loss(x_low, spec, sigma, direction)
        t_high = privacy_loss(x_high, spec, sigma, direction)
    return t_low, t_high


def loss_cdf(t: np.ndarray, spec: SensitivitySpec, sigma: float, direction: Direction) -> np.ndarray:
    """Exact Pr[L <= t] of the continuous loss, for a spec with some positive sensitivity."""
    return _loss_cdf(np.atleast_1d(invert_loss(t, spec, sigma, direction)), spec, sigma, direction)


def mog_pld(
    spec: SensitivitySpec,
    sigma: float,
    direction: Direction,
    grid_spacing: float = DEFAULT_GRID_SPACING,
    tail_mass: float = DEFAULT_TAIL_MASS,
) -> DiscretePld:
    """
    Pessimistic discretized PLD of a single MoG mechanism.

    Each grid cell (t - grid_spacing, t] sends its mass to t. Mass below the
    lowest grid point joins the lowest point; mass above the highest grid
    point (less than ``tail_mass``) becomes infinity mass.

    Args:
        spec: Sensitivity distribution
        sigma: Gaussian standard deviation
        direction: Adjacency direction
        grid_spacing: Loss grid spacing in nats
        tail_mass: Probability mass allowed outside the grid

    Returns:
        DiscretePld: the discretized loss distribution

    Raises:
        DomainError: If sigma, grid_spacing or tail_mass are out of range
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive: {sigma}")
    if grid_spacing <= 0:
        raise DomainError(f"grid_spacing must be positive: {grid_spacing}")
    if not 0.0 < tail_mass < 1.0:
        raise DomainError(f"tail_mass must be in (0, 1): {tail_mass}")

    if spec.is_constant:
        return DiscretePld.point_mass(direction, grid_spacing)

    t_low, t_high = loss_range(spec, sigma, direction, tail_mass)
    index_low = math.floor(t_low / grid_spacing)
    index_high = max(math.ceil(t_high / grid_spacing), index_low)
    grid = np.arange(index_low, index_high + 1) * grid_spacing

    x = invert_loss(grid, spec, sigma, direction)
    cdf = _loss_cdf(x, spec, sigma, direction)
    pmf = np.diff(cdf, prepend=0.0)
    np.clip(pmf, 0.0, None, out=pmf)
    infinity_mass = float(_loss_sf(x[-1:], spec, sigma, direction)[0])

    pld = DiscretePld(grid_spacing, index_low, pmf, infinity_mass, direction)
    logger.debug(
        "Built %s PLD on [%.4f, %.4f]",
        direction.value, grid[0], grid[-1],
        extra={"sigma": sigma, "grid_points": pmf.size, "infinity_mass": infinity_mass},
    )
    return pld.validate()


def delta_for_epsilon(pld: DiscretePld, epsilon: float) -> float:
    """
    Hockey-stick divergence at alpha = e^epsilon from a PLD.

    delta = infinity_mass + sum_l pmf(l) * max(1 - e^(epsilon - l), 0). For a
    pessimistic PLD this is an upper bound on the true delta.
    """
    losses = pld.losses
    above = losses > epsilon
    delta = pld.infinity_mass + float(
        np.dot(pld.pmf[above], -np.expm1(epsilon - losses[above]))
    )
    return min(max(delta, 0.0), 1.0)


def epsilon_for_delta(pld: DiscretePld, delta: float) -> float:
    """
    Smallest nonnegative epsilon with delta_for_epsilon(pld, epsilon) <= delta.

    Args:
        pld: Privacy-loss distribution
        delta: Target delta in (0, 1)

    Returns:
        The epsilon (to EPSILON_TOLERANCE), or math.inf if delta does not
        exceed the infinity mass.

    Raises:
        DomainError: If delta is not in (0, 1)
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1): {delta}")
    if delta <= pld.infinity_mass:
        logger.debug("delta %.3e is below infinity mass %.3e", delta, pld.infinity_mass)
        return math.inf
    if delta_for_epsilon(pld, 0.0) <= delta:
        return 0.0

    # Above the largest finite loss only the infinity mass remains.
    lo, hi = 0.0, max(pld.max_loss, 0.0)
    while hi - lo > EPSILON_TOLERANCE:
        mid = 0.5 * (lo + hi)
        if delta_for_epsilon(pld, mid) <= delta:
            hi = mid
        else:
            lo = mid
    return hi


def gaussian_delta(sigma: float, epsilon: float, rounds: int = 1) -> float:
    """
    Analytic delta(epsilon) of the sensitivity-1 Gaussian mechanism composed ``rounds`` times.

    delta = Phi(1/(2s) - eps*s) - e^eps * Phi(-1/(2s) - eps*s) with s = sigma / sqrt(rounds).
    """
    s = sigma / math.sqrt(rounds)
    upper = special.ndtr(0.5 / s - epsilon * s)
    lower = math.exp(epsilon + special.log_ndtr(-0.5 / s - epsilon * s))
    return float(max(upper - lower, 0.0))
