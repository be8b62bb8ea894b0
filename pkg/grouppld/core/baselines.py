"""
Comparison curves for group-level accounting.

``vadhan_*`` converts an example-level (eps, delta) guarantee into a group
guarantee with the black-box rule (k * eps, k * e^(k * eps) * delta); the
linear lower bound simply multiplies the example-level epsilon by k. The lower
bound is a comparison heuristic, not a certified bound.
"""

import logging
import math
from typing import Dict, List, Optional

import numpy as np

from .accountant import composed_plds, group_epsilon
from .constants import EPSILON_SEARCH_CAP, EPSILON_TOLERANCE, VADHAN_SCAN_STEP
from .errors import DomainError
from .pld import delta_for_epsilon
from .types import AccountantConfig, DiscretePld, Direction, GroupConversion

logger = logging.getLogger(__name__)

# exp() overflows above this
_MAX_LOG_FLOAT = math.log(np.finfo(float).max)


def vadhan_forward(epsilon1: float, delta1: float, k: int) -> GroupConversion:
    """
    Group guarantee implied by an example-level (epsilon1, delta1) guarantee.

    Args:
        epsilon1: Example-level epsilon (>= 0)
        delta1: Example-level delta in [0, 1)
        k: Group size (>= 1)

    Returns:
        GroupConversion: (k * epsilon1, k * e^(k * epsilon1) * delta1, saturated),
        where saturated flags a delta term >= 1. The delta term is never clamped;
        it is math.inf when it overflows.

    Examples:
        >>> vadhan_forward(1.0, 1e-6, 2).delta
        1.4778112197861...e-05
    """
    if epsilon1 < 0:
        raise DomainError(f"epsilon1 must be nonnegative: {epsilon1}")
    if not 0.0 <= delta1 < 1.0:
        raise DomainError(f"delta1 must be in [0, 1): {delta1}")
    if k < 1:
        raise DomainError(f"Group size must be at least 1: {k}")

    epsilon = k * epsilon1
    if delta1 == 0.0:
        return GroupConversion(epsilon, 0.0, False)
    log_delta = math.log(k) + epsilon + math.log(delta1)
    delta = math.exp(log_delta) if log_delta < _MAX_LOG_FLOAT else math.inf
    return GroupConversion(epsilon, delta, log_delta >= 0.0)


def _example_level_plds(
    config: AccountantConfig,
    example_plds: Optional[Dict[Direction, DiscretePld]] = None,
) -> List[DiscretePld]:
    if example_plds is None:
        example_plds = composed_plds(config.with_k(1))
    return list(example_plds.values())


def _example_delta(plds: List[DiscretePld], epsilon1: float) -> float:
    return max(delta_for_epsilon(pld, epsilon1) for pld in plds)


def conversion_example_delta(delta: float, epsilon: float, k: int) -> float:
    """Example-level delta, delta * e^(-epsilon) / k, that the k = 1 curve must meet at epsilon / k."""
    return math.exp(math.log(delta) - math.log(k) - epsilon)


def vadhan_group_delta(config: AccountantConfig, epsilon: float) -> GroupConversion:
    """Group delta at ``epsilon`` via the conversion applied to the k = 1 curve at epsilon / k."""
    if config.k == 0:
        return GroupConversion(0.0, 0.0, False)
    epsilon1 = max(epsilon, 0.0) / config.k
    delta1 = _example_delta(_example_level_plds(config), epsilon1)
    if delta1 >= 1.0:
        return GroupConversion(config.k * epsilon1, math.inf, True)
    return vadhan_forward(epsilon1, delta1, config.k)


def vadhan_group_epsilon(
    config: AccountantConfig,
    delta: float,
    example_plds: Optional[Dict[Direction, DiscretePld]] = None,
) -> float:
    """
    Group epsilon obtained by converting the example-level PLD curve.

    Finds the smallest epsilon such that the k = 1 curve satisfies
    delta1(epsilon / k) <= delta * e^(-epsilon) / k, by a scan of step
    VADHAN_SCAN_STEP followed by bisection. Required example-level
    deltas below the k = 1 PLD's resolvable floor (its infinity mass plus one
    machine epsilon) cannot be certified, which yields math.inf.

    Args:
        config: Accountant configuration (its k is the group size)
        delta: Target group delta in (0, 1)
        example_plds: Composed k = 1 PLDs of the same run; looked up when omitted

    Returns:
        float: the epsilon, or math.inf

    Raises:
        DomainError: If delta is not in (0, 1)
    """
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1): {delta}")
    k = config.k
    if k == 0:
        return 0.0

    plds = _example_level_plds(config, example_plds)
    floor = max(pld.infinity_mass for pld in plds) + np.finfo(float).eps
    log_delta_over_k = math.log(delta) - math.log(k)

    def feasible(epsilon: float) -> bool:
        required = conversion_example_delta(delta, epsilon, k)
        if required < floor:
            return False
        return _example_delta(plds, epsilon / k) <= required

    # Past this epsilon the required example-level delta is below the floor.
    limit = min(EPSILON_SEARCH_CAP, log_delta_over_k - math.log(floor) - EPSILON_TOLERANCE)
    # The feasible set need not be an interval; scan for its first point.
    first = None
    if limit >= 0:
        grid = np.append(np.arange(0.0, limit, VADHAN_SCAN_STEP), limit)
        first = next((i for i, epsilon in enumerate(grid) if feasible(float(epsilon))), None)
    if first is None:
        logger.warning(
            "Group conversion has no finite epsilon",
            extra={"k": k, "sigma": config.sigma, "delta": delta},
        )
        return math.inf
    if first == 0:
        return 0.0

    lo, hi = float(grid[first - 1]), float(grid[first])
    while hi - lo > EPSILON_TOLERANCE:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def linear_lower_bound(
    config: AccountantConfig,
    delta: float,
    example_epsilon: Optional[float] = None,
) -> float:
    """k times the example-level epsilon at the same delta (heuristic comparison curve).

    ``example_epsilon`` is the k = 1 epsilon at ``delta`` when the caller already has it.
    """
    if config.k == 0:
        return 0.0
    if example_epsilon is None:
        example_epsilon = group_epsilon(config.with_k(1), delta)
    return config.k * example_epsilon
