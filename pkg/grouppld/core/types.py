"""
Type definitions for the accounting modules.
"""

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np

from .constants import (
    DEFAULT_GRID_SPACING,
    DEFAULT_TAIL_MASS,
    DEFAULT_TRUNCATION_MASS,
    MASS_TOLERANCE,
    NORMALIZATION_TOLERANCE,
)
from .errors import DomainError, NumericalError


class Direction(enum.Enum):
    """Adjacency direction of a dominating pair.

    ADD pairs (N(0, s^2), sum_i p_i N(c_i, s^2)); REMOVE is the reversed pair.
    """

    ADD = "add"
    REMOVE = "remove"


@dataclass(frozen=True)
class SensitivitySpec:
    """Finite distribution over nonnegative scalar sensitivities.

    Attributes:
        sensitivities: Strictly increasing nonnegative sensitivities c_i
        probabilities: Probabilities p_i, summing to 1
    """

    sensitivities: Tuple[float, ...]
    probabilities: Tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.sensitivities) == 0:
            raise DomainError("A sensitivity spec needs at least one entry")
        if len(self.sensitivities) != len(self.probabilities):
            raise DomainError("sensitivities and probabilities must have the same length")
        if any(c < 0 or not math.isfinite(c) for c in self.sensitivities):
            raise DomainError(f"Sensitivities must be finite and nonnegative: {self.sensitivities}")
        if any(b <= a for a, b in zip(self.sensitivities, self.sensitivities[1:])):
            raise DomainError(f"Sensitivities must be strictly increasing: {self.sensitivities}")
        if any(not 0.0 <= p <= 1.0 for p in self.probabilities):
            raise DomainError(f"Probabilities must lie in [0, 1]: {self.probabilities}")
        total = math.fsum(self.probabilities)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise DomainError(f"Probabilities sum to {total!r}, not 1")

    @classmethod
    def from_mapping(cls, mapping: Mapping[float, float]) -> "SensitivitySpec":
        """Build a spec from a {sensitivity: probability} mapping."""
        items = sorted((float(c), float(p)) for c, p in mapping.items())
        return cls(tuple(c for c, _ in items), tuple(p for _, p in items))

    @classmethod
    def point_mass(cls, sensitivity: float = 0.0) -> "SensitivitySpec":
        return cls((float(sensitivity),), (1.0,))

    def as_dict(self) -> Dict[float, float]:
        return dict(zip(self.sensitivities, self.probabilities))

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Sensitivities and probabilities as float arrays."""
        return (
            np.asarray(self.sensitivities, dtype=float),
            np.asarray(self.probabilities, dtype=float),
        )

    @property
    def mean(self) -> float:
        return math.fsum(c * p for c, p in zip(self.sensitivities, self.probabilities))

    def _support(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((c, p) for c, p in zip(self.sensitivities, self.probabilities) if p > 0)

    @property
    def max_sensitivity(self) -> float:
        """Largest sensitivity carrying positive probability."""
        return self._support()[-1][0]

    @property
    def max_sensitivity_probability(self) -> float:
        return self._support()[-1][1]

    @property
    def min_positive_sensitivity(self) -> Optional[float]:
        return next((c for c, _ in self._support() if c > 0), None)

    @property
    def zero_mass(self) -> float:
        """Pr[c = 0]; bounds the add-direction loss above by -ln of it."""
        return self.probabilities[0] if self.sensitivities[0] == 0 else 0.0

    @property
    def is_constant(self) -> bool:
        """True when every sensitivity is 0, i.e. the pair is identical."""
        return self.max_sensitivity == 0

    def cdf(self, value: float) -> float:
        return math.fsum(p for c, p in zip(self.sensitivities, self.probabilities) if c <= value)

    def truncated(self, floor: float) -> Tuple["SensitivitySpec", float]:
        """Drop entries whose probability is below ``floor``.

        Returns:
            Tuple of the renormalized spec and the dropped probability mass.
        """
        kept = [(c, p) for c, p in zip(self.sensitivities, self.probabilities) if p >= floor]
        if not kept:
            raise DomainError(f"Truncation floor {floor} drops every entry")
        dropped = math.fsum(p for p in self.probabilities if p < floor)
        remaining = 1.0 - dropped
        return (
            SensitivitySpec(tuple(c for c, _ in kept), tuple(p / remaining for _, p in kept)),
            dropped,
        )


@dataclass(frozen=True, eq=False)
class DiscretePld:
    """Discretized privacy-loss distribution on the grid ``index * grid_spacing``.

    ``pmf[i]`` is the mass at loss ``(min_loss_index + i) * grid_spacing``;
    ``infinity_mass`` is the mass of an unbounded loss.
    """

    grid_spacing: float
    min_loss_index: int
    pmf: np.ndarray
    infinity_mass: float
    direction: Direction
    pessimistic: bool = True

    @classmethod
    def point_mass(
        cls,
        direction: Direction,
        grid_spacing: float = DEFAULT_GRID_SPACING,
        loss_index: int = 0,
    ) -> "DiscretePld":
        return cls(grid_spacing, loss_index, np.ones(1), 0.0, direction)

    @property
    def losses(self) -> np.ndarray:
        return (self.min_loss_index + np.arange(self.pmf.size)) * self.grid_spacing

    @property
    def max_loss(self) -> float:
        return (self.min_loss_index + self.pmf.size - 1) * self.grid_spacing

    @property
    def total_mass(self) -> float:
        return math.fsum(self.pmf) + self.infinity_mass

    @property
    def mean_loss(self) -> float:
        """Mean of the finite part of the loss, conditioned on being finite."""
        finite = float(self.pmf.sum())
        return float(np.dot(self.pmf, self.losses)) / finite if finite > 0 else math.inf

    def validate(self) -> "DiscretePld":
        if self.grid_spacing <= 0:
            raise DomainError(f"grid_spacing must be positive: {self.grid_spacing}")
        if np.any(self.pmf < 0):
            raise NumericalError("PLD has negative probability mass")
        if not 0.0 <= self.infinity_mass <= 1.0:
            raise NumericalError(f"infinity_mass out of range: {self.infinity_mass}")
        if abs(self.total_mass - 1.0) > MASS_TOLERANCE:
            raise NumericalError(f"PLD mass {self.total_mass!r} is not 1")
        return self


@dataclass(frozen=True)
class Poisson:
    """Each example is included independently with probability ``q``."""

    q: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise DomainError(f"Poisson sampling probability must be in [0, 1]: {self.q}")

    def describe(self) -> Dict[str, Any]:
        return {"scheme": "poisson", "q": self.q}


@dataclass(frozen=True)
class FixedBatch:
    """Uniformly random batches of exactly ``batch_size`` out of ``dataset_size`` examples."""

    batch_size: int
    dataset_size: int

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise DomainError(f"Batch size must be positive: {self.batch_size}")
        if self.batch_size > self.dataset_size:
            raise DomainError(
                f"Batch size {self.batch_size} exceeds dataset size {self.dataset_size}"
            )

    def describe(self) -> Dict[str, Any]:
        return {"scheme": "fixed_batch", "batch_size": self.batch_size, "dataset_size": self.dataset_size}


SamplingScheme = Union[Poisson, FixedBatch]


@dataclass(frozen=True)
class AccountantConfig:
    """Parameters of a T-round DP-SGD run and of its numerical accounting."""

    sigma: float
    rounds: int
    k: int
    scheme: SamplingScheme
    grid_spacing: float = DEFAULT_GRID_SPACING
    tail_mass: float = DEFAULT_TAIL_MASS
    truncation_mass: float = DEFAULT_TRUNCATION_MASS

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise DomainError(f"Noise multiplier must be positive: {self.sigma}")
        if self.rounds < 1:
            raise DomainError(f"Number of rounds must be at least 1: {self.rounds}")
        if self.k < 0:
            raise DomainError(f"Group size must be nonnegative: {self.k}")
        if not isinstance(self.scheme, (Poisson, FixedBatch)):
            raise DomainError(f"Unknown sampling scheme: {self.scheme!r}")
        if not self.grid_spacing > 0:
            raise DomainError(f"grid_spacing must be positive: {self.grid_spacing}")
        if not 0.0 < self.tail_mass < 1.0:
            raise DomainError(f"tail_mass must be in (0, 1): {self.tail_mass}")
        if not 0.0 <= self.truncation_mass < 1.0:
            raise DomainError(f"truncation_mass must be in [0, 1): {self.truncation_mass}")

    def with_k(self, k: int) -> "AccountantConfig":
        return replace(self, k=k)

    def with_sigma(self, sigma: float) -> "AccountantConfig":
        return replace(self, sigma=sigma)

    def params(self) -> Dict[str, Any]:
        """Flat parameter record for JSON output."""
        params: Dict[str, Any] = {
            "sigma": self.sigma,
            "rounds": self.rounds,
            "grid_spacing": self.grid_spacing,
            "tail_mass": self.tail_mass,
            "truncation_mass": self.truncation_mass,
        }
        params.update(self.scheme.describe())
        return params


@dataclass(frozen=True)
class SweepRow:
    """One row of a group-size sweep; ``math.inf`` marks a non-finite epsilon."""

    k: int
    epsilon_mog: float
    epsilon_vadhan: float
    epsilon_lower_lb: float
    sigma: Optional[float] = None


class GroupConversion(NamedTuple):
    """Group-level (epsilon, delta) from the black-box conversion."""

    epsilon: float
    delta: float
    saturated: bool


class TightnessEstimate(NamedTuple):
    estimate: float
    std_error: float


@dataclass(frozen=True)
class ValidationCheck:
    """Outcome of one oracle comparison."""

    name: str
    observed: float
    bound: float
    passed: bool
    detail: str = field(default="")
