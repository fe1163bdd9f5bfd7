"""Report containers shared by the verification modules and the CLI.

All reports serialize to plain dicts (JSON-ready, keys sorted at dump time)
and to CSV rows for spreadsheet-side inspection.  Serialization is fully
deterministic: no timestamps, stable key order, floats via repr.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


def _plain(value):
    """Recursively convert numpy scalars/arrays to builtin types."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class VerificationReport:
    """Named residuals against tolerances with a single pass flag."""

    name: str
    residuals: dict
    tolerances: dict
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "type": "verification",
            "name": self.name,
            "residuals": _plain(self.residuals),
            "tolerances": _plain(self.tolerances),
            "passed": bool(self.passed),
            "details": _plain(self.details),
        }

    def csv_rows(self):
        header = ["name", "residual_key", "residual", "tolerance", "passed"]
        rows = []
        for key in sorted(self.residuals):
            rows.append([self.name, key, repr(float(self.residuals[key])),
                         repr(float(self.tolerances.get(key, float("nan")))),
                         str(bool(self.passed))])
        return header, rows


@dataclass
class LengthReport:
    """A Hofer-type length with its per-node quadrature breakdown.

    breakdown rows are dicts with keys t, osc_lo, osc_hi, osc_mid and
    reeb_term; `value` aggregates them per the flavor, `enclosure` brackets
    the value using the certified oscillation interval ends.
    """

    value: float
    flavor: str                      # "L1inf" | "Linf"
    breakdown: list
    quadrature: str
    enclosure: tuple = (0.0, 0.0)    # (lo, hi) certified bracket

    def to_dict(self) -> dict:
        return {
            "type": "length",
            "value": float(self.value),
            "flavor": self.flavor,
            "quadrature": self.quadrature,
            "enclosure": [float(self.enclosure[0]), float(self.enclosure[1])],
            "breakdown": _plain(self.breakdown),
        }

    def csv_rows(self):
        header = ["t", "osc_lo", "osc_hi", "osc_mid", "reeb_term"]
        rows = [[repr(float(row["t"])), repr(float(row["osc_lo"])),
                 repr(float(row["osc_hi"])), repr(float(row["osc_mid"])),
                 repr(float(row["reeb_term"]))] for row in self.breakdown]
        return header, rows


@dataclass
class SequenceDiagnostics:
    """Pairwise distance data for a sequence of isotopies."""

    pairwise_D: np.ndarray
    pairwise_c0: np.ndarray
    cauchy_margin: float
    flavor: str = "L1inf"

    def to_dict(self) -> dict:
        return {
            "type": "sequence",
            "flavor": self.flavor,
            "pairwise_D": _plain(self.pairwise_D),
            "pairwise_c0": _plain(self.pairwise_c0),
            "cauchy_margin": float(self.cauchy_margin),
        }

    def csv_rows(self):
        header = ["i", "j", "distance", "c0_distance"]
        m = np.asarray(self.pairwise_D)
        c = np.asarray(self.pairwise_c0)
        rows = []
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                rows.append([str(i), str(j), repr(float(m[i, j])), repr(float(c[i, j]))])
        return header, rows


@dataclass
class TaskResult:
    """Outcome of one scenario task: a report, a scalar, or an error."""

    name: str
    command: str
    status: str                      # "pass" | "fail" | "error"
    report: object = None            # report dataclass, dict, or None
    error: str = ""

    def to_dict(self) -> dict:
        body = self.report
        if hasattr(body, "to_dict"):
            body = body.to_dict()
        return {
            "name": self.name,
            "command": self.command,
            "status": self.status,
            "report": _plain(body),
            "error": self.error,
        }


@dataclass
class RunReport:
    """Ordered task results plus the environment stamp."""

    tasks: list
    environment: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.status == "pass" for t in self.tasks)

    def to_dict(self, include_environment: bool = True) -> dict:
        out = {
            "schema": "cokinetic-report/1",
            "passed": self.passed,
            "tasks": [t.to_dict() for t in self.tasks],
        }
        if include_environment:
            out["environment"] = _plain(self.environment)
        return out

    def write_csv_dir(self, directory) -> list:
        """One CSV per task that carries tabular data; returns written paths."""
        import os

        written = []
        os.makedirs(directory, exist_ok=True)
        for task in self.tasks:
            if not hasattr(task.report, "csv_rows"):
                continue
            header, rows = task.report.csv_rows()
            path = os.path.join(directory, f"{task.name}.csv")
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                writer.writerows(rows)
            written.append(path)
        return written


def csv_text(report) -> str:
    """Render any report with csv_rows() to a CSV string (tests/debugging)."""
    header, rows = report.csv_rows()
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()
