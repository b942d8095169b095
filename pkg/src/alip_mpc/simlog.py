"""Structured closed-loop logs, events and the fixed CSV schema.

One row per controller tick.  Foot placements appear only on rows at
impact instants (empty cells otherwise).  Floats are serialized with
repr(), which round-trips exactly; two runs of the same scenario produce
byte-identical files.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ScenarioError

__all__ = ["Event", "SimLog", "CSV_COLUMNS", "write_log_csv", "read_log_csv", "log_csv_text"]

EVENT_SLIP = "slip-violation"
EVENT_MECH = "mech-violation"
EVENT_QP_INFEASIBLE = "qp-infeasible"
EVENT_FALLBACK = "fallback-used"
EVENT_PLANT_SINGULAR = "plant-singularity"

CSV_COLUMNS = [
    "t",
    "step_index",
    "stance",
    "x_c",
    "y_c",
    "L_x",
    "L_y",
    "x0_pred_xc",
    "x0_pred_yc",
    "x0_pred_Lx",
    "x0_pred_Ly",
    "k_x",
    "k_y",
    "mu_eff",
    "vx_cmd",
    "ufp_x",
    "ufp_y",
    "slip_bound_x",
    "slip_bound_y",
    "qp_status",
    "qp_iters",
    "solve_time_s",
]

_FLOAT_COLUMNS = {
    "t", "x_c", "y_c", "L_x", "L_y",
    "x0_pred_xc", "x0_pred_yc", "x0_pred_Lx", "x0_pred_Ly",
    "k_x", "k_y", "mu_eff", "vx_cmd",
    "slip_bound_x", "slip_bound_y", "solve_time_s",
}
_OPTIONAL_FLOAT_COLUMNS = {"ufp_x", "ufp_y"}
_INT_COLUMNS = {"step_index", "stance", "qp_iters"}


@dataclass(frozen=True)
class Event:
    kind: str
    t: float
    detail: str
    sample_index: int


@dataclass
class SimLog:
    """Column-oriented tick records plus the event list."""

    columns: dict = field(default_factory=lambda: {c: [] for c in CSV_COLUMNS})
    events: list[Event] = field(default_factory=list)
    truncated: bool = False
    terminal_event: Optional[Event] = None
    solve_time_wall: list = field(default_factory=list)  # never serialized

    def append(self, **values) -> None:
        for c in CSV_COLUMNS:
            self.columns[c].append(values[c])

    @property
    def n_rows(self) -> int:
        return len(self.columns["t"])

    def col(self, name: str) -> list:
        return self.columns[name]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SimLog):
            return NotImplemented
        return self.columns == other.columns


def _cell(name: str, value) -> str:
    if value is None:
        return ""
    if name in _INT_COLUMNS:
        return str(int(value))
    if name == "qp_status":
        return str(value)
    return repr(float(value))


def _write_rows(log: SimLog, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in range(log.n_rows):
        writer.writerow(_cell(c, log.columns[c][r]) for c in CSV_COLUMNS)


def write_log_csv(log: SimLog, path: str | Path) -> None:
    """Serialize the fixed 22-column schema; header row always present."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            _write_rows(log, fh)
    except OSError as exc:
        raise ScenarioError(f"cannot write log to {path}: {exc}") from exc


def log_csv_text(log: SimLog) -> str:
    """The exact byte content write_log_csv would produce."""
    buf = io.StringIO(newline="")
    _write_rows(log, buf)
    return buf.getvalue()


def read_log_csv(path: str | Path) -> SimLog:
    """Parse a log file back into columns (events are not stored in CSV)."""
    path = Path(path)
    log = SimLog()
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_COLUMNS:
                raise ScenarioError(
                    f"{path}: unexpected CSV header; expected the fixed "
                    f"{len(CSV_COLUMNS)}-column schema"
                )
            for row in reader:
                if len(row) != len(CSV_COLUMNS):
                    raise ScenarioError(f"{path}: malformed row {row!r}")
                values = {}
                for name, cell in zip(CSV_COLUMNS, row):
                    if name in _INT_COLUMNS:
                        values[name] = int(cell)
                    elif name == "qp_status":
                        values[name] = cell
                    elif cell == "":
                        values[name] = None
                    else:
                        values[name] = float(cell)
                log.append(**values)
    except OSError as exc:
        raise ScenarioError(f"cannot read log from {path}: {exc}") from exc
    return log
