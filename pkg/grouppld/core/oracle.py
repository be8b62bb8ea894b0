"""
Independent validators for the accountant.

Three routes to the same hockey-stick values, none of which shares the
pessimistic discretization of the accountant:

- adaptive quadrature of max(P - alpha Q, 0) for one-dimensional mixtures,
- a fine-grid composition for T <= 3 with nearest-point rounding,
- a Monte-Carlo simulator of the worst-case one-dimensional DP-SGD runs.

validation_suite() strings these together into the pass/fail report behind
``grouppld validate``.
"""

import functools
import logging
import math
from concurrent import futures
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate, optimize, special

from .accountant import composed_plds, group_delta
from .composition import self_compose
from .constants import (
    DEFAULT_GRID_SPACING,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    MASS_TOLERANCE,
    MAX_SIMULATION_DRAWS,
    ORACLE_GRID_REFINEMENT,
    ORACLE_MAX_ROUNDS,
    ORACLE_TAIL_MASS,
    QUADRATURE_HALF_WIDTH,
    QUADRATURE_SUBINTERVALS,
    QUADRATURE_TOLERANCE,
    SIMULATION_CHUNK_SIZE,
    VALIDATION_BINOMIAL,
    VALIDATION_COMPOSE_TOLERANCE,
    VALIDATION_EPSILONS,
    VALIDATION_MC_Q,
    VALIDATION_MC_STD_ERRORS,
    VALIDATION_SIGMA,
    VALIDATION_TIGHTNESS_GAP,
)
from .distributions import binomial_sensitivities, hypergeometric_sensitivities
from .errors import DomainError
from .pld import delta_for_epsilon, gaussian_delta, invert_loss, loss_cdf, loss_range, privacy_loss
from .types import (
    AccountantConfig,
    DiscretePld,
    Direction,
    FixedBatch,
    Poisson,
    SamplingScheme,
    SensitivitySpec,
    TightnessEstimate,
    ValidationCheck,
)

logger = logging.getLogger(__name__)

# Grid used to locate sign changes of P - alpha Q before integrating
_SIGN_SCAN_POINTS = 2001


def _mixture_density(x: np.ndarray, spec: SensitivitySpec, sigma: float) -> np.ndarray:
    c, p = spec.arrays()
    z = np.subtract.outer(x, c) / sigma
    return np.exp(-0.5 * z ** 2) @ p / (sigma * math.sqrt(2.0 * math.pi))


def hockey_stick_quadrature(
    p_spec: SensitivitySpec,
    q_spec: SensitivitySpec,
    sigma: float,
    alpha: float,
) -> float:
    """
    Hockey-stick divergence H_alpha(P || Q) of two Gaussian mixtures by quadrature.

    P and Q share the standard deviation ``sigma`` and have the centers and
    weights of ``p_spec`` and ``q_spec``. The integrand max(P - alpha Q, 0) is
    split at its sign changes, and each positive piece is integrated
    adaptively on [min_c - 12 sigma, max_c + 12 sigma].

    Args:
        p_spec: Centers and weights of P
        q_spec: Centers and weights of Q
        sigma: Common standard deviation
        alpha: Divergence order (>= 0)

    Returns:
        float: the divergence, clipped to [0, 1]

    Examples:
        >>> gaussian = SensitivitySpec.point_mass(0.0)
        >>> hockey_stick_quadrature(gaussian, gaussian, 1.0, 1.0)
        0.0
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive: {sigma}")
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative: {alpha}")

    def difference(x):
        return _mixture_density(np.asarray(x, dtype=float), p_spec, sigma) - alpha * _mixture_density(
            np.asarray(x, dtype=float), q_spec, sigma
        )

    low = min(p_spec.sensitivities[0], q_spec.sensitivities[0]) - QUADRATURE_HALF_WIDTH * sigma
    high = max(p_spec.sensitivities[-1], q_spec.sensitivities[-1]) + QUADRATURE_HALF_WIDTH * sigma

    scan = np.linspace(low, high, _SIGN_SCAN_POINTS)
    values = difference(scan)
    signs = np.sign(values)
    # Scan points where the integrand vanishes are sign changes too.
    breakpoints = [low, high, *scan[signs == 0]]
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        breakpoints.append(optimize.brentq(difference, scan[i], scan[i + 1], xtol=1e-14))
    breakpoints = np.unique(breakpoints)

    pieces = len(breakpoints) - 1
    total = 0.0
    for a, b in zip(breakpoints, breakpoints[1:]):
        if float(difference(0.5 * (a + b))) <= 0:
            continue
        value, _ = integrate.quad(
            lambda x: max(float(difference(x)), 0.0),
            a,
            b,
            epsabs=QUADRATURE_TOLERANCE / pieces,
            epsrel=0.0,
            limit=QUADRATURE_SUBINTERVALS,
        )
        total += value
    return min(max(total, 0.0), 1.0)


def exact_single_delta(
    spec: SensitivitySpec,
    sigma: float,
    epsilon,
    direction: Direction,
):
    """
    Exact delta(epsilon) of one MoG mechanism via the Gaussian CDFs.

    With x the output where the loss equals epsilon, the add direction gives
    Phi(x/s) - e^eps sum_i p_i Phi((x - c_i)/s) and the remove direction
    sum_i p_i Phi((c_i - x)/s) - e^eps Phi(-x/s). Any real epsilon is
    accepted, negative values included.

    Args:
        spec: Sensitivity distribution
        sigma: Gaussian standard deviation
        epsilon: Scalar or array of epsilons
        direction: Adjacency direction

    Returns:
        delta values with the shape of ``epsilon``
    """
    eps = np.asarray(epsilon, dtype=float)
    if spec.is_constant:
        result = np.maximum(-np.expm1(eps), 0.0)
        return float(result) if eps.ndim == 0 else result

    x = np.atleast_1d(invert_loss(eps, spec, sigma, direction))
    c, p = spec.arrays()
    with np.errstate(divide="ignore"):
        log_p = np.log(p)
        if direction is Direction.ADD:
            upper = special.ndtr(x / sigma)
            log_lower = special.logsumexp(
                special.log_ndtr(np.subtract.outer(x, c) / sigma) + log_p, axis=-1
            )
        else:
            upper = special.ndtr(np.subtract.outer(c, x).T / sigma) @ p
            log_lower = special.log_ndtr(-x / sigma)
        with np.errstate(over="ignore", invalid="ignore"):
            lower = np.exp(np.atleast_1d(eps) + log_lower)
    result = np.clip(np.nan_to_num(upper - lower, nan=0.0), 0.0, 1.0)
    return float(result[0]) if eps.ndim == 0 else result


@functools.lru_cache(maxsize=8)
def _fine_pld(spec: SensitivitySpec, sigma: float, direction: Direction, grid_spacing: float) -> DiscretePld:
    """Single-round loss on a fine grid, each loss rounded to its nearest grid point.

    Tails lighter than ORACLE_TAIL_MASS are dropped, so the PMF sums to just
    under 1.
    """
    t_low, t_high = loss_range(spec, sigma, direction, ORACLE_TAIL_MASS, upper_share=0.5)
    index_low = math.floor(t_low / grid_spacing)
    index_high = max(math.ceil(t_high / grid_spacing), index_low)
    # Cell j covers (t_j - h/2, t_j + h/2].
    edges = (np.arange(index_low, index_high + 2) - 0.5) * grid_spacing
    pmf = np.clip(np.diff(loss_cdf(edges, spec, sigma, direction)), 0.0, None)
    logger.debug(
        "Oracle grid for %s built",
        direction.value,
        extra={"sigma": sigma, "grid_points": pmf.size},
    )
    return DiscretePld(grid_spacing, index_low, pmf, 0.0, direction, pessimistic=False)


def compose_oracle(
    spec: SensitivitySpec,
    sigma: float,
    rounds: int,
    epsilon: float,
    direction: Direction,
    grid_spacing: Optional[float] = None,
) -> float:
    """
    Reference delta(epsilon) of the ``rounds``-fold MoG mechanism.

    rounds = 1 uses exact_single_delta. For 2 and 3 rounds the continuous loss
    is placed on a grid ``ORACLE_GRID_REFINEMENT`` times finer than the
    accountant's default, convolved, and summed directly. Rounding to the
    nearest grid point is not pessimistic, so the result sits below the
    accountant's delta.

    Args:
        spec: Sensitivity distribution
        sigma: Gaussian standard deviation
        rounds: Number of compositions, 1 to 3
        epsilon: Target epsilon
        direction: Adjacency direction
        grid_spacing: Oracle grid spacing (default DEFAULT_GRID_SPACING / ORACLE_GRID_REFINEMENT)

    Raises:
        DomainError: If rounds is not in 1..3
    """
    if not 1 <= rounds <= ORACLE_MAX_ROUNDS:
        raise DomainError(f"compose_oracle supports 1 to {ORACLE_MAX_ROUNDS} rounds: {rounds}")
    if sigma <= 0:
        raise DomainError(f"sigma must be positive: {sigma}")
    if rounds == 1:
        return exact_single_delta(spec, sigma, epsilon, direction)
    if spec.is_constant:
        return max(-math.expm1(epsilon), 0.0)

    spacing = grid_spacing if grid_spacing is not None else DEFAULT_GRID_SPACING / ORACLE_GRID_REFINEMENT
    composed = self_compose(_fine_pld(spec, sigma, direction, spacing), rounds, truncation_mass=0.0)
    return delta_for_epsilon(composed, epsilon)


def _scheme_spec(k: int, scheme: SamplingScheme) -> SensitivitySpec:
    if isinstance(scheme, Poisson):
        return binomial_sensitivities(k, scheme.q)
    if isinstance(scheme, FixedBatch):
        return hypergeometric_sensitivities(scheme.batch_size, scheme.dataset_size, k)
    raise DomainError(f"Unknown sampling scheme: {scheme!r}")


def _draw_group_counts(rng: np.random.Generator, k: int, scheme: SamplingScheme, size) -> np.ndarray:
    """Per-round increment shift of the neighbouring run.

    Poisson: each of the k group members has gradient -1 and is sampled with
    probability q. Fixed batch: the B-shifted increment moves by 2 per group
    member that lands in the batch.
    """
    if isinstance(scheme, Poisson):
        return rng.binomial(k, scheme.q, size=size).astype(float)
    return 2.0 * rng.hypergeometric(k, scheme.dataset_size, scheme.batch_size, size=size)


def _simulate_chunk(
    seed: np.random.SeedSequence,
    size: int,
    k: int,
    scheme: SamplingScheme,
    spec: SensitivitySpec,
    sigma: float,
    rounds: int,
    epsilon: float,
    direction: Direction,
) -> Tuple[float, float]:
    rng = np.random.default_rng(seed)
    increments = rng.normal(0.0, sigma, size=(size, rounds))
    if direction is Direction.REMOVE:
        increments += _draw_group_counts(rng, k, scheme, (size, rounds))
    total_loss = privacy_loss(increments, spec, sigma, direction).sum(axis=1)
    values = -np.expm1(np.minimum(epsilon - total_loss, 0.0))
    return float(values.sum()), float(np.square(values).sum())


def simulate_tightness(
    k: int,
    scheme: SamplingScheme,
    sigma: float,
    rounds: int,
    epsilon: float,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    direction: Direction = Direction.ADD,
    workers: int = 1,
) -> TightnessEstimate:
    """
    Monte-Carlo estimate of the group-level delta of the worst-case DP-SGD run.

    The released quantities are the per-round increments of the one-dimensional
    model (learning rate 1, clip norm 1): pure Gaussian noise on the original
    dataset, shifted by the number of sampled group members on the neighbouring
    one. Each sample contributes max(1 - e^(epsilon - L), 0) with L the exact
    log-likelihood ratio of its T increments.

    Args:
        k: Group size (>= 1)
        scheme: Sampling scheme
        sigma: Noise multiplier
        rounds: Number of rounds T
        epsilon: Target epsilon
        samples: Number of simulated runs
        seed: Seed of the numpy SeedSequence
        direction: ADD samples the original run, REMOVE the neighbouring one
        workers: Threads used for the sample chunks

    Returns:
        TightnessEstimate: the estimate and its standard error. Chunks are
        seeded by spawning from ``seed``, so the result does not depend on
        ``workers``.

    Raises:
        DomainError: If a parameter is out of range or samples * rounds exceeds
        MAX_SIMULATION_DRAWS
    """
    if k < 1:
        raise DomainError(f"Group size must be at least 1: {k}")
    if sigma <= 0:
        raise DomainError(f"sigma must be positive: {sigma}")
    if rounds < 1:
        raise DomainError(f"Number of rounds must be at least 1: {rounds}")
    if samples < 2:
        raise DomainError(f"At least two samples are required: {samples}")
    if samples * rounds > MAX_SIMULATION_DRAWS:
        raise DomainError(
            f"samples * rounds = {samples * rounds} exceeds {MAX_SIMULATION_DRAWS} draws"
        )
    if workers < 1:
        raise DomainError(f"workers must be positive: {workers}")

    spec = _scheme_spec(k, scheme)
    sizes = [SIMULATION_CHUNK_SIZE] * (samples // SIMULATION_CHUNK_SIZE)
    if samples % SIMULATION_CHUNK_SIZE:
        sizes.append(samples % SIMULATION_CHUNK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(item):
        child, size = item
        return _simulate_chunk(child, size, k, scheme, spec, sigma, rounds, epsilon, direction)

    with futures.ThreadPoolExecutor(max_workers=workers) as pool:
        partials = list(pool.map(run, zip(seeds, sizes)))

    mean = math.fsum(s for s, _ in partials) / samples
    second = math.fsum(sq for _, sq in partials) / samples
    variance = max(second - mean ** 2, 0.0) * samples / (samples - 1)
    logger.debug(
        "Simulated %d runs in %d chunks",
        samples, len(sizes),
        extra={"k": k, "sigma": sigma, "rounds": rounds, "epsilon": epsilon},
    )
    return TightnessEstimate(mean, math.sqrt(variance / samples))


def _pair(spec: SensitivitySpec, direction: Direction) -> Tuple[SensitivitySpec, SensitivitySpec]:
    gaussian = SensitivitySpec.point_mass(0.0)
    return (gaussian, spec) if direction is Direction.ADD else (spec, gaussian)


def validation_suite(
    grid_spacing: float = DEFAULT_GRID_SPACING,
    samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> List[ValidationCheck]:
    """
    Compare the accountant against the oracles on a fixed parameter grid.

    Checks, in order:
        - T = 1, both directions, each validation epsilon: accountant delta is
          at least the quadrature value, and exceeds it by less than
          VALIDATION_TIGHTNESS_GAP.
        - T = 2, same grid: the same two checks against compose_oracle.
        - T = 2 Gaussian: accountant delta within VALIDATION_COMPOSE_TOLERANCE
          of the analytic curve.
        - Monte-Carlo: the simulator agrees with quadrature within
          VALIDATION_MC_STD_ERRORS standard errors.

    Args:
        grid_spacing: Accountant grid spacing; a coarse grid keeps the
            pessimism checks passing but fails the gap checks
        samples: Monte-Carlo sample count
        seed: Monte-Carlo seed

    Returns:
        List[ValidationCheck]: one entry per check, in a fixed order
    """
    group_size, q = VALIDATION_BINOMIAL
    sigma = VALIDATION_SIGMA
    spec = binomial_sensitivities(group_size, q)
    checks: List[ValidationCheck] = []

    for rounds in (1, 2):
        config = AccountantConfig(
            sigma=sigma, rounds=rounds, k=group_size, scheme=Poisson(q), grid_spacing=grid_spacing
        )
        plds = composed_plds(config)
        for direction in Direction:
            for epsilon in VALIDATION_EPSILONS:
                accountant = delta_for_epsilon(plds[direction], epsilon)
                if rounds == 1:
                    p_spec, q_spec = _pair(spec, direction)
                    reference = hockey_stick_quadrature(p_spec, q_spec, sigma, math.exp(epsilon))
                    slack = QUADRATURE_TOLERANCE
                else:
                    reference = compose_oracle(
                        spec, sigma, rounds, epsilon, direction,
                        grid_spacing=grid_spacing / ORACLE_GRID_REFINEMENT,
                    )
                    slack = MASS_TOLERANCE
                label = f"T={rounds} {direction.value} eps={epsilon:g}"
                checks.append(ValidationCheck(
                    name=f"{label} pessimism",
                    observed=accountant,
                    bound=reference,
                    passed=accountant >= reference - slack,
                    detail="accountant >= oracle",
                ))
                gap = accountant - reference
                checks.append(ValidationCheck(
                    name=f"{label} gap",
                    observed=gap,
                    bound=VALIDATION_TIGHTNESS_GAP,
                    passed=gap < VALIDATION_TIGHTNESS_GAP,
                    detail="accountant - oracle",
                ))

    gaussian = AccountantConfig(sigma=sigma, rounds=2, k=1, scheme=Poisson(1.0), grid_spacing=grid_spacing)
    for epsilon in VALIDATION_EPSILONS:
        observed = group_delta(gaussian, epsilon)
        analytic = gaussian_delta(sigma, epsilon, rounds=2)
        checks.append(ValidationCheck(
            name=f"T=2 gaussian eps={epsilon:g}",
            observed=observed,
            bound=analytic,
            passed=abs(observed - analytic) <= VALIDATION_COMPOSE_TOLERANCE,
            detail="|accountant - analytic|",
        ))

    p_spec, q_spec = _pair(binomial_sensitivities(1, VALIDATION_MC_Q), Direction.ADD)
    reference = hockey_stick_quadrature(p_spec, q_spec, sigma, 1.0)
    estimate, std_error = simulate_tightness(
        1, Poisson(VALIDATION_MC_Q), sigma, 1, 0.0, samples=samples, seed=seed
    )
    checks.append(ValidationCheck(
        name="T=1 monte-carlo eps=0",
        observed=estimate,
        bound=reference,
        passed=abs(estimate - reference) <= VALIDATION_MC_STD_ERRORS * std_error,
        detail=f"std_error={std_error:.3g}",
    ))

    failed = sum(not check.passed for check in checks)
    logger.info("Validation finished: %d of %d checks failed", failed, len(checks))
    return checks
