"""
Constants used throughout the grouppld package.
"""

from pathlib import Path
from typing import Dict, Tuple

# Discretization and truncation defaults
DEFAULT_GRID_SPACING: float = 1e-4
DEFAULT_TAIL_MASS: float = 1e-12
DEFAULT_TRUNCATION_MASS: float = 1e-15

# Share of the tail budget left above a single-round loss grid; the rest lies below it
UPPER_TAIL_SHARE: float = 1e-6

# Composed PLD pairs kept in memory; a k_max = 16 sweep over four sigmas fits
COMPOSED_CACHE_SIZE: int = 64

# Convolution strategy
FFT_SIZE_THRESHOLD: int = 1024
FFT_CLAMP_FLOOR: float = 1e-15

# Numerical tolerances
NORMALIZATION_TOLERANCE: float = 1e-12
CONVOLUTION_DRIFT_TOLERANCE: float = 1e-10
MASS_TOLERANCE: float = 1e-9
LOSS_TOLERANCE: float = 1e-12
EPSILON_TOLERANCE: float = 1e-9
MAX_BISECTION_STEPS: int = 200

# Search range for epsilon; anything beyond the cap is reported as infinite
EPSILON_SEARCH_CAP: float = 5000.0

# Step of the epsilon scan that precedes bisection in the group conversion
VADHAN_SCAN_STEP: float = 0.05

# Oracle settings
ORACLE_GRID_REFINEMENT: int = 20
ORACLE_TAIL_MASS: float = 1e-14
ORACLE_MAX_ROUNDS: int = 3
QUADRATURE_HALF_WIDTH: float = 12.0
QUADRATURE_TOLERANCE: float = 1e-10
QUADRATURE_SUBINTERVALS: int = 1000

# Monte-Carlo simulator settings
DEFAULT_SAMPLES: int = 1_000_000
DEFAULT_SEED: int = 0
SIMULATION_CHUNK_SIZE: int = 100_000
MAX_SIMULATION_DRAWS: int = 100_000_000

# Validation grid (T=1 / T=2 / Monte-Carlo checks)
VALIDATION_EPSILONS: Tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
VALIDATION_SIGMA: float = 1.0
VALIDATION_BINOMIAL: Tuple[int, float] = (2, 0.3)
VALIDATION_TIGHTNESS_GAP: float = 1e-4
VALIDATION_COMPOSE_TOLERANCE: float = 1e-3
VALIDATION_MC_STD_ERRORS: float = 3.0
VALIDATION_MC_Q: float = 0.5

# Output formatting
INF_LITERAL: str = "inf"
SWEEP_COLUMNS: Tuple[str, ...] = ("k", "epsilon_mog", "epsilon_vadhan", "epsilon_lower_lb")
LOWER_BOUND_LABEL: str = "lower_bound (heuristic)"
METHODS: Tuple[str, ...] = ("mog", "vadhan", "lower")
SINGLE_OUTPUTS: Tuple[str, ...] = ("json", "csv")
SWEEP_OUTPUTS: Tuple[str, ...] = ("csv", "json", "table", "text")
DEFAULT_K_MAX: int = 16

# Logging configuration
LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_DATE_FORMAT: str = "%Y-%m-%d %H:%M:%S"
LOGS_DIR: Path = Path.cwd() / "grouppld_logs"

# Structured fields appended to log lines by the CLI formatter
LOG_EXTRA_KEYS: Tuple[str, ...] = (
    "k",
    "sigma",
    "rounds",
    "direction",
    "grid_points",
    "infinity_mass",
    "epsilon",
    "delta",
)

# Rich console styling
CONSOLE_STYLES: Dict[str, str] = {
    "error": "red",
    "warning": "yellow"
}

# Display settings for tables
TABLE_SETTINGS = {
    "SWEEP": {
        "title": "Group-level epsilon",
        "border_style": "cyan",
        "header_style": "bold cyan"
    }
}

# Messages
MESSAGES = {
    "OPERATION_CANCELLED": "Operation cancelled by user",
    "ALL_CHECKS_PASSED": "All validation checks passed.",
    "CHECKS_FAILED": "{failed} of {total} validation checks failed.",
    "NO_SCHEME": "Exactly one sampling scheme is required: --poisson-q, or --batch-size with --dataset-size.",
    "NEED_DELTA_OR_EPSILON": "Exactly one of --delta or --epsilon is required.",
    "LOWER_NEEDS_DELTA": "The lower-bound heuristic only answers epsilon queries; pass --delta.",
    "ERROR": "Error: {error}",
}

# Default log levels for third-party packages
THIRD_PARTY_LOG_LEVELS = {
    "rich": "WARNING",
    "click": "WARNING"
}
