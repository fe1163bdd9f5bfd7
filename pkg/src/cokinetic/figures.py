"""Figure rendering for run reports.

Renders one PNG per task that carries plottable data: length breakdowns as
per-node bar/line plots, residual summaries as log-scale bars against their
tolerances.  Files land next to the CSV exports; JSON stays the normative
record.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reports import LengthReport, SequenceDiagnostics, VerificationReport


def _length_figure(report: LengthReport, path: str) -> None:
    t = np.array([row["t"] for row in report.breakdown])
    mid = np.array([row["osc_mid"] for row in report.breakdown])
    lo = np.array([row["osc_lo"] for row in report.breakdown])
    hi = np.array([row["osc_hi"] for row in report.breakdown])
    reeb = np.array([row["reeb_term"] for row in report.breakdown])
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.fill_between(t, lo + reeb, hi + reeb, alpha=0.3, label="osc enclosure")
    ax.plot(t, mid + reeb, lw=1.2, label="osc + reeb term")
    if np.any(reeb):
        ax.plot(t, reeb, lw=0.8, ls="--", label="reeb term")
    ax.set_xlabel("t")
    ax.set_ylabel("per-node term")
    ax.set_title(f"{report.flavor} length = {report.value:.6g}")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _verification_figure(report: VerificationReport, path: str) -> None:
    keys = sorted(report.residuals)
    vals = np.array([max(abs(float(report.residuals[k])), 1e-18) for k in keys])
    tols = np.array([abs(float(report.tolerances.get(k, np.nan))) for k in keys])
    x = np.arange(len(keys))
    fig, ax = plt.subplots(figsize=(max(4, 1.2 * len(keys)), 3.5))
    ax.bar(x, vals, width=0.6, label="residual")
    for i, tol in enumerate(tols):
        if np.isfinite(tol) and tol > 0:
            ax.hlines(tol, i - 0.4, i + 0.4, colors="r", lw=1.0)
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(keys, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("magnitude")
    ax.set_title(f"{report.name}: {'pass' if report.passed else 'FAIL'}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _sequence_figure(report: SequenceDiagnostics, path: str) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    for ax, mat, title in zip(axes,
                              (report.pairwise_D, report.pairwise_c0),
                              ("pairwise distance", "pairwise c0")):
        im = ax.imshow(np.asarray(mat), cmap="viridis")
        ax.set_title(title)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.suptitle(f"cauchy margin = {report.cauchy_margin:.3g} ({report.flavor})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_figures(run_report, directory) -> list:
    """One figure per task with renderable data; returns written paths."""
    os.makedirs(directory, exist_ok=True)
    written = []
    for task in run_report.tasks:
        report = task.report
        path = os.path.join(directory, f"{task.name}.png")
        if isinstance(report, LengthReport) and report.breakdown:
            _length_figure(report, path)
        elif isinstance(report, VerificationReport) and report.residuals:
            _verification_figure(report, path)
        elif isinstance(report, SequenceDiagnostics):
            _sequence_figure(report, path)
        else:
            continue
        written.append(path)
    return written
