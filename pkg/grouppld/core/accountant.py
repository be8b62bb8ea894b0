"""
Group-level privacy accounting for DP-SGD.

The dominating pair of T-round DP-SGD under the add (or remove) up-to-k
adjacency is the T-fold composition of a scalar MoG mechanism with random
sensitivity Binom(k, q) for Poisson sampling, or 2 * Hypergeom(B, n + k, k) for
fixed-size batches. Both directions are composed and the guarantee is the
worse of the two.

Example:
    >>> config = AccountantConfig(sigma=1.0, rounds=2000, k=4, scheme=Poisson(0.01))
    >>> epsilon = group_epsilon(config, delta=1e-6)
"""

import functools
import logging
import math
from typing import Dict, Optional

from .composition import self_compose
from .constants import COMPOSED_CACHE_SIZE, EPSILON_SEARCH_CAP
from .distributions import binomial_sensitivities, hypergeometric_sensitivities
from .errors import DomainError
from .pld import delta_for_epsilon, epsilon_for_delta, mog_pld
from .types import AccountantConfig, DiscretePld, Direction, FixedBatch, Poisson, SensitivitySpec

logger = logging.getLogger(__name__)


def dominating_spec(config: AccountantConfig) -> SensitivitySpec:
    """
    Random sensitivity of the per-round MoG dominating pair.

    Args:
        config: Accountant configuration

    Returns:
        SensitivitySpec: Binom(k, q) for Poisson sampling, 2 * Hypergeom(B, n + k, k)
        for fixed batches

    Raises:
        DomainError: If the scheme parameters are invalid
    """
    scheme = config.scheme
    if isinstance(scheme, Poisson):
        return binomial_sensitivities(config.k, scheme.q)
    if isinstance(scheme, FixedBatch):
        return hypergeometric_sensitivities(scheme.batch_size, scheme.dataset_size, config.k)
    raise DomainError(f"Unknown sampling scheme: {scheme!r}")


@functools.lru_cache(maxsize=COMPOSED_CACHE_SIZE)
def composed_plds(config: AccountantConfig) -> Dict[Direction, DiscretePld]:
    """
    T-fold composed PLDs of the dominating pair, one per direction.

    Results are memoized per configuration so sweeps and baselines share the
    k = 1 curves.
    """
    spec = dominating_spec(config)
    plds = {}
    for direction in Direction:
        single = mog_pld(spec, config.sigma, direction, config.grid_spacing, config.tail_mass)
        plds[direction] = self_compose(single, config.rounds, config.truncation_mass)
        logger.info(
            "Composed %s PLD ready",
            direction.value,
            extra={
                "k": config.k,
                "sigma": config.sigma,
                "rounds": config.rounds,
                "grid_points": plds[direction].pmf.size,
                "infinity_mass": plds[direction].infinity_mass,
            },
        )
    return plds


def direction_deltas(config: AccountantConfig, epsilon: float) -> Dict[Direction, float]:
    """Per-direction delta(epsilon) of the composed PLDs."""
    if config.k == 0:
        delta = 0.0 if epsilon >= 0 else -math.expm1(epsilon)
        return {direction: delta for direction in Direction}
    return {
        direction: delta_for_epsilon(pld, epsilon)
        for direction, pld in composed_plds(config).items()
    }


def group_delta(config: AccountantConfig, epsilon: float) -> float:
    """
    Smallest delta for which the run is (epsilon, delta)-DP for groups of size k.

    Args:
        config: Accountant configuration
        epsilon: Target epsilon

    Returns:
        float: max over directions of the composed PLD's delta(epsilon)
    """
    return max(direction_deltas(config, epsilon).values())


def direction_epsilons(config: AccountantConfig, delta: float) -> Dict[Direction, float]:
    """Per-direction epsilon; values above EPSILON_SEARCH_CAP become math.inf."""
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must be in (0, 1): {delta}")
    if config.k == 0:
        return {direction: 0.0 for direction in Direction}

    epsilons = {}
    for direction, pld in composed_plds(config).items():
        epsilon = epsilon_for_delta(pld, delta)
        epsilons[direction] = math.inf if epsilon > EPSILON_SEARCH_CAP else epsilon
    return epsilons


def group_epsilon(config: AccountantConfig, delta: float) -> float:
    """
    Smallest epsilon for which the run is (epsilon, delta)-DP for groups of size k.

    Args:
        config: Accountant configuration
        delta: Target delta in (0, 1)

    Returns:
        float: the epsilon, or math.inf if delta does not exceed a composed
        infinity mass or epsilon exceeds EPSILON_SEARCH_CAP

    Raises:
        DomainError: If delta is not in (0, 1)
    """
    epsilon = max(direction_epsilons(config, delta).values())
    if math.isinf(epsilon):
        logger.warning(
            "No finite epsilon for group size %d",
            config.k,
            extra={"k": config.k, "sigma": config.sigma, "delta": delta},
        )
    return epsilon


def dominant_direction(
    config: AccountantConfig,
    delta: Optional[float] = None,
    epsilon: Optional[float] = None,
) -> Direction:
    """Direction that determines the guarantee at a delta (or at an epsilon); REMOVE on ties."""
    if (delta is None) == (epsilon is None):
        raise DomainError("Exactly one of delta or epsilon is required")
    values = direction_epsilons(config, delta) if delta is not None else direction_deltas(config, epsilon)
    return Direction.ADD if values[Direction.ADD] > values[Direction.REMOVE] else Direction.REMOVE
