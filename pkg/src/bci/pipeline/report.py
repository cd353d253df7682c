"""
Session report rendering and persistence.

The text report has three panels: online decoding accuracies, the system
accuracy row, and the per-stage operation times.
"""

from __future__ import annotations

import json
from pathlib import Path

from core.container import atomic_write_bytes, read_bytes
from core.errors import ErrorCode, FileError

from .config import STAGES
from .session import PUBLISHED_SYSTEM_ACCURACY, SessionReport

_STAGE_TITLES = {
    "prepare": "Prepare",
    "vi_task": "VI Task",
    "vi_data_proc": "VI Proc",
    "vi_infer": "VI Infer",
    "mi_task": "MI Task",
    "mi_data_proc": "MI Proc",
    "mi_infer": "MI Infer",
    "robot_exec": "Robot",
}


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{100 * value:.2f}"


def _row(cells: list[str], width: int = 10) -> str:
    return "".join(f"{c:>{width}}" for c in cells)


def render_session_report(report: SessionReport) -> str:
    """Plain-text report; identical input gives byte-identical output."""
    lines = [
        f"Online session: {report.n_trials} trials ({report.n_aborted} aborted), "
        f"scenario {report.scenario or '-'}, aggregation {report.aggregation or '-'}",
    ]
    if report.partial:
        lines.append(f"PARTIAL: {report.error}")

    lines += ["", "Online decoding accuracy (%)", _row(["VI", "MI"]), _row([_pct(report.vi_accuracy), _pct(report.mi_accuracy)])]

    headers = ["VI", "Grasp", "MI", "Place", "System", "Product", "Reference"]
    values = [
        _pct(report.vi_accuracy),
        _pct(report.grasp_rate),
        _pct(report.mi_accuracy),
        _pct(report.place_rate),
        _pct(report.system_accuracy),
        _pct(report.product_estimate),
        _pct(PUBLISHED_SYSTEM_ACCURACY),
    ]
    lines += ["", "System accuracy (%)", _row(headers), _row(values)]
    if report.product_estimate is not None and _pct(report.product_estimate) != _pct(PUBLISHED_SYSTEM_ACCURACY):
        lines.append(
            f"Reference {_pct(PUBLISHED_SYSTEM_ACCURACY)} differs from the component product {_pct(report.product_estimate)}; "
            "the published system figure does not follow from its component rates"
        )

    timing = report.mean_timing.to_dict()
    lines += [
        "",
        "Operation times (s)",
        _row([_STAGE_TITLES[s] for s in STAGES] + ["Total"]),
        _row([f"{timing[s]:.3f}" for s in STAGES] + [f"{timing['total']:.3f}"]),
    ]
    return "\n".join(lines) + "\n"


def write_session_report(report: SessionReport, path: Path | str) -> None:
    atomic_write_bytes(Path(path), json.dumps(report.to_dict(), indent=2, sort_keys=True).encode("utf-8"))


def read_session_report(path: Path | str) -> SessionReport:
    """
    Raises:
        FileError: If the file is missing or is not a session report
    """
    try:
        data = json.loads(read_bytes(Path(path)).decode("utf-8"))
        if not isinstance(data, dict):
            raise ValueError("top level is not an object")
        return SessionReport.from_dict(data)
    except (ValueError, TypeError) as e:
        raise FileError(code=ErrorCode.INVALID_FORMAT, user_message=f"{path} is not a session report: {e}") from e
