"""
Command-line interface for the grouppld package.
"""

import functools
import logging
import math
from concurrent import futures
from pathlib import Path
from typing import List, Optional

import click
from rich.logging import RichHandler

from grouppld.core.accountant import (
    composed_plds,
    dominant_direction,
    group_delta,
    group_epsilon,
)
from grouppld.core.baselines import (
    conversion_example_delta,
    linear_lower_bound,
    vadhan_group_delta,
    vadhan_group_epsilon,
)
from grouppld.core.constants import (
    CONSOLE_STYLES,
    DEFAULT_GRID_SPACING,
    DEFAULT_K_MAX,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TAIL_MASS,
    MESSAGES,
    METHODS,
    SINGLE_OUTPUTS,
    SWEEP_OUTPUTS,
    THIRD_PARTY_LOG_LEVELS,
)
from grouppld.core.errors import AccountingError
from grouppld.core.oracle import validation_suite
from grouppld.core.types import AccountantConfig, FixedBatch, Poisson, SamplingScheme, SweepRow
from grouppld.utils.display import display_sweep, error_console, sweep_text, validation_report
from grouppld.utils.export import epsilon_record, format_real, sweep_to_csv, sweep_to_json, to_json
from grouppld.utils.logging import ExtraFieldsFormatter, setup_logging

logger = logging.getLogger(__name__)


def handle_accounting_errors(command):
    """Report AccountingError on stderr and exit with status 1; Ctrl-C exits quietly."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except AccountingError as error:
            logger.debug("Command failed", exc_info=True)
            error_console.print(MESSAGES["ERROR"].format(error=error), style=CONSOLE_STYLES["error"], markup=False)
            raise click.exceptions.Exit(1)
        except KeyboardInterrupt:
            error_console.print(f"\n{MESSAGES['OPERATION_CANCELLED']}", style=CONSOLE_STYLES["warning"])
            raise click.exceptions.Exit(130)

    return wrapper


def scheme_options(command):
    """Sampling scheme and accountant grid options shared by epsilon and sweep."""
    options = [
        click.option("--poisson-q", type=float, help="Poisson sampling probability q"),
        click.option("--batch-size", type=int, help="Fixed batch size B"),
        click.option("--dataset-size", type=int, help="Dataset size n (fixed batches)"),
        click.option("--rounds", "-T", type=click.IntRange(min=1), required=True, help="Number of DP-SGD rounds T"),
        click.option("--grid-spacing", type=float, default=DEFAULT_GRID_SPACING, show_default=True,
                     help="Privacy-loss grid spacing in nats"),
        click.option("--tail-mass", type=float, default=DEFAULT_TAIL_MASS, show_default=True,
                     help="Probability mass allowed outside the loss grid"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def build_scheme(
    poisson_q: Optional[float],
    batch_size: Optional[int],
    dataset_size: Optional[int],
) -> SamplingScheme:
    """Exactly one of --poisson-q or --batch-size with --dataset-size."""
    fixed = batch_size is not None or dataset_size is not None
    if (poisson_q is None) == (not fixed):
        raise click.UsageError(MESSAGES["NO_SCHEME"])
    if poisson_q is not None:
        return Poisson(poisson_q)
    if batch_size is None or dataset_size is None:
        raise click.UsageError(MESSAGES["NO_SCHEME"])
    return FixedBatch(batch_size, dataset_size)


def configure_logging(verbose: bool, log_file: Optional[str]) -> None:
    log_level = "DEBUG" if verbose else "WARNING"

    rich_handler = RichHandler(
        rich_tracebacks=True,
        markup=False,
        show_time=True,
        show_level=True,
        show_path=False,
        console=error_console,
        tracebacks_extra_lines=2,
        tracebacks_theme="monokai",
    )
    rich_handler.setFormatter(ExtraFieldsFormatter("%(message)s"))
    setup_logging(log_level=log_level, log_file=Path(log_file) if log_file else None, stream_handler=rich_handler)

    # Silence other loggers unless in verbose mode
    if not verbose:
        for logger_name, level in THIRD_PARTY_LOG_LEVELS.items():
            logging.getLogger(logger_name).setLevel(getattr(logging, level))


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable verbose output with debug information")
@click.option("--log-file", type=click.Path(dir_okay=False),
              help="Also write logs to this file (a bare name goes to grouppld_logs/)")
def cli(verbose, log_file):
    """
    Group-level privacy accounting for DP-SGD.

    Computes (epsilon, delta) guarantees for groups of k examples under Poisson
    or fixed-batch sampling, compares them with the black-box group conversion,
    and validates the numerics against independent oracles.
    """
    configure_logging(verbose, log_file)


def _direction_delta(method: str, delta: float, epsilon: float, k: int) -> float:
    """Delta at which the k = 1 curve decides the reported epsilon.

    The conversion certifies the k = 1 curve at delta * e^(-epsilon) / k; with
    no finite epsilon it falls back to delta / k. The other methods read the
    curve at ``delta`` itself.
    """
    if method != "vadhan" or k == 0:
        return delta
    if not math.isfinite(epsilon):
        return delta / k
    return conversion_example_delta(delta, epsilon, k)


@cli.command("epsilon")
@scheme_options
@click.option("--sigma", type=float, required=True, help="Noise multiplier")
@click.option("--k", "k", type=click.IntRange(min=0), required=True, help="Group size")
@click.option("--delta", type=float, help="Target delta; reports the group epsilon")
@click.option("--epsilon", type=float, help="Target epsilon; reports the group delta")
@click.option("--method", type=click.Choice(METHODS), default="mog", show_default=True,
              help="mog accountant, vadhan conversion, or the linear lower heuristic")
@click.option("--output", "-o", type=click.Choice(SINGLE_OUTPUTS), default="json", show_default=True)
@handle_accounting_errors
def cmd_epsilon(poisson_q, batch_size, dataset_size, rounds, grid_spacing, tail_mass,
                sigma, k, delta, epsilon, method, output):
    """Group-level epsilon at --delta (or delta at --epsilon) for one group size."""
    if (delta is None) == (epsilon is None):
        raise click.UsageError(MESSAGES["NEED_DELTA_OR_EPSILON"])
    if epsilon is not None and method == "lower":
        raise click.UsageError(MESSAGES["LOWER_NEEDS_DELTA"])

    config = AccountantConfig(
        sigma=sigma,
        rounds=rounds,
        k=k,
        scheme=build_scheme(poisson_q, batch_size, dataset_size),
        grid_spacing=grid_spacing,
        tail_mass=tail_mass,
    )
    params = {**config.params(), "method": method}
    # Baselines are driven by the example-level curve.
    reference = config if method == "mog" else config.with_k(1)

    if delta is not None:
        if method == "mog":
            result = group_epsilon(config, delta)
        elif method == "vadhan":
            result = vadhan_group_epsilon(config, delta)
        else:
            result = linear_lower_bound(config, delta)
        direction = dominant_direction(reference, delta=_direction_delta(method, delta, result, k))
        record = epsilon_record(result, delta, k, direction.value, params)
    else:
        if method == "mog":
            result = group_delta(config, epsilon)
            direction = dominant_direction(config, epsilon=epsilon)
        else:
            conversion = vadhan_group_delta(config, epsilon)
            result = conversion.delta
            params["saturated"] = conversion.saturated
            direction = dominant_direction(reference, epsilon=max(epsilon, 0.0) / max(k, 1))
        record = epsilon_record(epsilon, result, k, direction.value, params)

    logger.info("Query answered", extra={"k": k, "sigma": sigma, "rounds": rounds})
    if output == "json":
        click.echo(to_json(record))
    else:
        click.echo("epsilon,delta,k,direction_dominant")
        click.echo(",".join([
            format_real(float(record["epsilon"])),
            format_real(float(record["delta"])),
            str(k),
            record["direction_dominant"],
        ]))


def compute_sweep(
    base: AccountantConfig,
    sigmas: List[float],
    k_max: int,
    delta: float,
    workers: Optional[int] = None,
) -> List[SweepRow]:
    """
    Sweep rows for every (sigma, k) with k in 1..k_max, ordered by (sigma, k).

    The k = 1 curves and epsilons, shared by all baselines of a sigma, are
    computed first and handed to the rows, which run concurrently.
    """
    ordered = sorted(set(sigmas))
    tag = len(ordered) > 1
    example = {}
    for sigma in ordered:
        config = base.with_sigma(sigma).with_k(1)
        example[sigma] = (composed_plds(config), group_epsilon(config, delta))

    def row(item):
        sigma, k = item
        config = base.with_sigma(sigma).with_k(k)
        example_plds, example_epsilon = example[sigma]
        return SweepRow(
            k=k,
            epsilon_mog=example_epsilon if k == 1 else group_epsilon(config, delta),
            epsilon_vadhan=vadhan_group_epsilon(config, delta, example_plds),
            epsilon_lower_lb=linear_lower_bound(config, delta, example_epsilon),
            sigma=sigma if tag else None,
        )

    items = [(sigma, k) for sigma in ordered for k in range(1, k_max + 1)]
    with futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(row, items))


@cli.command("sweep")
@scheme_options
@click.option("--sigma", type=float, required=True, multiple=True,
              help="Noise multiplier; repeat for several curves")
@click.option("--delta", type=float, required=True, help="Target delta")
@click.option("--k-max", type=click.IntRange(min=1), default=DEFAULT_K_MAX, show_default=True,
              help="Largest group size")
@click.option("--output", "-o", type=click.Choice(SWEEP_OUTPUTS), default="csv", show_default=True)
@click.option("--workers", type=click.IntRange(min=1), help="Threads used for the rows")
@handle_accounting_errors
def cmd_sweep(poisson_q, batch_size, dataset_size, rounds, grid_spacing, tail_mass,
              sigma, delta, k_max, output, workers):
    """Group epsilon for k = 1..k-max, with the conversion and lower-bound columns."""
    base = AccountantConfig(
        sigma=sigma[0],
        rounds=rounds,
        k=1,
        scheme=build_scheme(poisson_q, batch_size, dataset_size),
        grid_spacing=grid_spacing,
        tail_mass=tail_mass,
    )
    rows = compute_sweep(base, list(sigma), k_max, delta, workers)
    with_sigma = len(set(sigma)) > 1

    if output == "csv":
        click.echo(sweep_to_csv(rows, with_sigma), nl=False)
    elif output == "json":
        params = {key: value for key, value in base.params().items() if key != "sigma"}
        params.update({"sigmas": sorted(set(sigma)), "delta": delta})
        click.echo(sweep_to_json(rows, params, with_sigma))
    elif output == "text":
        click.echo(sweep_text(rows, with_sigma))
    else:
        display_sweep(rows, with_sigma)


@cli.command("validate")
@click.option("--grid-spacing", type=float, default=DEFAULT_GRID_SPACING, show_default=True,
              help="Accountant grid spacing under test")
@click.option("--samples", type=click.IntRange(min=2), default=DEFAULT_SAMPLES, show_default=True,
              help="Monte-Carlo sample count")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Monte-Carlo seed")
@click.pass_context
@handle_accounting_errors
def cmd_validate(ctx, grid_spacing, samples, seed):
    """Check the accountant against quadrature, fine-grid composition and simulation."""
    checks = validation_suite(grid_spacing=grid_spacing, samples=samples, seed=seed)
    click.echo(validation_report(checks))
    if not all(check.passed for check in checks):
        ctx.exit(1)


def main():
    """Console-script entry point."""
    cli(prog_name="grouppld")


if __name__ == "__main__":
    main()
