"""
CSV and JSON serialization of accountant results.

Reals are written in their shortest round-trip form; non-finite values
become the literal ``inf`` in both formats.
"""

import csv
import io
import json
import math
from typing import Any, Dict, Iterable, List, Optional, Union

from ..core.constants import INF_LITERAL, SWEEP_COLUMNS
from ..core.types import SweepRow


def format_real(value: float) -> str:
    """Shortest decimal that round-trips to ``value``; ``inf`` when not finite."""
    value = float(value)
    if not math.isfinite(value):
        return INF_LITERAL
    return repr(value)


def json_real(value: float) -> Union[float, str]:
    """JSON-ready real: the float itself, or the ``inf`` literal."""
    value = float(value)
    return value if math.isfinite(value) else INF_LITERAL


def sweep_header(with_sigma: bool = False) -> List[str]:
    return (["sigma"] if with_sigma else []) + list(SWEEP_COLUMNS)


def sweep_record(row: SweepRow, with_sigma: bool = False) -> List[str]:
    """One CSV record; ``k`` stays an integer."""
    record = [
        str(row.k),
        format_real(row.epsilon_mog),
        format_real(row.epsilon_vadhan),
        format_real(row.epsilon_lower_lb),
    ]
    if with_sigma:
        record.insert(0, format_real(row.sigma))
    return record


def sweep_to_csv(rows: Iterable[SweepRow], with_sigma: bool = False) -> str:
    """
    Render sweep rows as CSV text.

    Args:
        rows: Rows in output order
        with_sigma: Prepend a ``sigma`` column (multi-sigma sweeps)

    Returns:
        str: header line plus one line per row, ``\\n`` terminated
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(sweep_header(with_sigma))
    for row in rows:
        writer.writerow(sweep_record(row, with_sigma))
    return buffer.getvalue()


def sweep_to_json(rows: Iterable[SweepRow], params: Dict[str, Any], with_sigma: bool = False) -> str:
    """Sweep rows as a single JSON object with the run parameters."""
    records = []
    for row in rows:
        record: Dict[str, Any] = {
            "k": row.k,
            "epsilon_mog": json_real(row.epsilon_mog),
            "epsilon_vadhan": json_real(row.epsilon_vadhan),
            "epsilon_lower_lb": json_real(row.epsilon_lower_lb),
        }
        if with_sigma:
            record = {"sigma": json_real(row.sigma), **record}
        records.append(record)
    return json.dumps({"rows": records, "params": _clean(params)})


def epsilon_record(
    epsilon: float,
    delta: float,
    k: int,
    direction_dominant: str,
    params: Dict[str, Any],
) -> Dict[str, Any]:
    """The single-query record printed by ``grouppld epsilon``."""
    return {
        "epsilon": json_real(epsilon),
        "delta": json_real(delta),
        "k": k,
        "direction_dominant": direction_dominant,
        "params": _clean(params),
    }


def to_json(record: Dict[str, Any]) -> str:
    return json.dumps(_clean(record))


def _clean(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _clean(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(item) for item in value]
    if isinstance(value, float):
        return json_real(value)
    return value


def format_cell(value: Optional[float]) -> str:
    """Table cell text for an optional real."""
    if value is None:
        return "-"
    return format_real(value)

