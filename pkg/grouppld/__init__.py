"""
grouppld - Group-level privacy accounting for DP-SGD.

This package computes (epsilon, delta) guarantees of DP-SGD with respect to
groups of up to k examples. Each round is dominated by a scalar
mixture-of-Gaussians mechanism whose random sensitivity is the number of
sampled group members; the rounds are composed numerically on a pessimistic
privacy-loss grid.

Key Features:
    - Poisson and fixed-batch sampling
    - Add and remove adjacency, worst direction reported
    - Black-box group conversion and linear lower heuristic for comparison
    - Quadrature, fine-grid and Monte-Carlo oracles for validation
    - CSV / JSON output for plotting

Basic Usage:
    >>> from grouppld import AccountantConfig, Poisson, group_epsilon
    >>> config = AccountantConfig(sigma=1.0, rounds=2000, k=4, scheme=Poisson(0.01))
    >>> epsilon = group_epsilon(config, delta=1e-6)

Module Structure:
    - core/: Accounting
        - distributions.py: Sensitivity distributions
        - pld.py: MoG privacy-loss distributions
        - composition.py: PLD self-composition
        - accountant.py: Group-level epsilon / delta
        - baselines.py: Group conversion and lower heuristic
        - oracle.py: Independent validators
        - constants.py: Package constants and settings
        - types.py: Type definitions
        - errors.py: Exception hierarchy
    - utils/: Utility functions
        - display.py: Tables and reports
        - export.py: CSV / JSON output
        - logging.py: Logging configuration
    - cli/: Command-line interface
        - main.py: CLI implementation
"""

from .core.accountant import composed_plds, group_delta, group_epsilon
from .core.baselines import linear_lower_bound, vadhan_forward, vadhan_group_delta, vadhan_group_epsilon
from .core.composition import convolve, self_compose
from .core.distributions import binomial_sensitivities, hypergeometric_sensitivities
from .core.errors import AccountingError, DomainError, NumericalError
from .core.pld import delta_for_epsilon, epsilon_for_delta, mog_pld, privacy_loss
from .core.types import (
    AccountantConfig,
    DiscretePld,
    Direction,
    FixedBatch,
    Poisson,
    SensitivitySpec,
)

__version__ = "0.1.0"

__all__ = [
    # Accounting
    "group_epsilon",
    "group_delta",
    "composed_plds",
    "mog_pld",
    "privacy_loss",
    "delta_for_epsilon",
    "epsilon_for_delta",
    "convolve",
    "self_compose",
    "binomial_sensitivities",
    "hypergeometric_sensitivities",

    # Baselines
    "vadhan_forward",
    "vadhan_group_delta",
    "vadhan_group_epsilon",
    "linear_lower_bound",

    # Type definitions
    "AccountantConfig",
    "DiscretePld",
    "Direction",
    "FixedBatch",
    "Poisson",
    "SensitivitySpec",

    # Errors
    "AccountingError",
    "DomainError",
    "NumericalError",
]
