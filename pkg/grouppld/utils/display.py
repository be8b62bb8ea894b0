"""
Display utilities for formatting and presenting results.
"""

from typing import List, Sequence

from rich.console import Console
from rich.table import Table
from tabulate import tabulate

from ..core.constants import LOWER_BOUND_LABEL, MESSAGES, TABLE_SETTINGS
from ..core.types import SweepRow, ValidationCheck
from .export import format_cell

# Initialize Rich consoles; stdout carries results, stderr carries messages
console = Console()
error_console = Console(stderr=True)


def _sweep_headers(with_sigma: bool) -> List[str]:
    headers = ["k", "epsilon (MoG)", "epsilon (Vadhan)", LOWER_BOUND_LABEL]
    return (["sigma"] if with_sigma else []) + headers


def _sweep_cells(row: SweepRow, with_sigma: bool) -> List[str]:
    cells = [
        str(row.k),
        format_cell(row.epsilon_mog),
        format_cell(row.epsilon_vadhan),
        format_cell(row.epsilon_lower_lb),
    ]
    return ([format_cell(row.sigma)] if with_sigma else []) + cells


def display_sweep(rows: Sequence[SweepRow], with_sigma: bool = False) -> None:
    """
    Show a group-size sweep as a Rich table.

    Args:
        rows: Sweep rows in output order
        with_sigma: Include the sigma column
    """
    table = Table(**TABLE_SETTINGS["SWEEP"])
    for header in _sweep_headers(with_sigma):
        table.add_column(header, justify="right")
    for row in rows:
        table.add_row(*_sweep_cells(row, with_sigma))
    console.print(table)


def sweep_text(rows: Sequence[SweepRow], with_sigma: bool = False) -> str:
    """Sweep as a plain-text table."""
    return tabulate(
        [_sweep_cells(row, with_sigma) for row in rows],
        headers=_sweep_headers(with_sigma),
        tablefmt="simple",
        disable_numparse=True,
    )


def validation_report(checks: Sequence[ValidationCheck]) -> str:
    """
    Deterministic text report of validation checks followed by a summary line.

    Values are printed with six significant digits so identical runs produce
    identical bytes.
    """
    table = tabulate(
        [
            [
                check.name,
                f"{check.observed:.6g}",
                f"{check.bound:.6g}",
                "PASS" if check.passed else "FAIL",
                check.detail,
            ]
            for check in checks
        ],
        headers=["check", "observed", "bound", "status", "detail"],
        tablefmt="simple",
        disable_numparse=True,
    )
    return f"{table}\n\n{validation_summary(checks)}"


def validation_summary(checks: Sequence[ValidationCheck]) -> str:
    failed = sum(not check.passed for check in checks)
    if failed == 0:
        return MESSAGES["ALL_CHECKS_PASSED"]
    return MESSAGES["CHECKS_FAILED"].format(failed=failed, total=len(checks))
