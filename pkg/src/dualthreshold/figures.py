"""Rendering of experiment reports as figures.

One PNG per report: the observed acceptance count as a bar, the expected
count as a dashed line, and the binomial interval as a shaded band.  All
rendering targets files; no display is ever opened.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import ExperimentReport

_BAR_OK = "#2b7bba"
_BAR_OUTSIDE = "#c23b22"


def render_experiment_figure(report: ExperimentReport, path: str | Path, dpi: int = 150) -> Path:
    path = Path(path)
    expected = report.expected_rate * report.trials
    lo, hi = report.interval

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    color = _BAR_OK if report.within_interval else _BAR_OUTSIDE
    ax.bar([0], [report.successes], width=0.5, color=color, label="observed")
    ax.axhspan(lo, hi, color="#c8d8c8", alpha=0.5, zorder=0,
               label=f"99.9% interval [{lo}, {hi}]")
    ax.axhline(expected, color="#444444", linestyle="--", linewidth=1,
               label=f"expected {expected:.1f}")
    ax.set_xticks([0])
    ax.set_xticklabels([report.experiment])
    ax.set_ylabel(f"acceptances over {report.trials} trials")
    ax.set_ylim(bottom=0)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def render_experiment_overview(reports: Sequence[ExperimentReport], path: str | Path,
                               dpi: int = 150) -> Path:
    """All reports side by side, one bar each, with their interval bands."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(max(5.0, 1.6 * len(reports)), 3.6))
    for i, report in enumerate(reports):
        lo, hi = report.interval
        color = _BAR_OK if report.within_interval else _BAR_OUTSIDE
        ax.bar([i], [report.successes], width=0.55, color=color)
        ax.plot([i - 0.35, i + 0.35], [lo, lo], color="#557755", linewidth=1)
        ax.plot([i - 0.35, i + 0.35], [hi, hi], color="#557755", linewidth=1)
        ax.plot([i - 0.3, i + 0.3],
                [report.expected_rate * report.trials] * 2,
                color="#444444", linestyle="--", linewidth=1)
    ax.set_xticks(range(len(reports)))
    ax.set_xticklabels([r.experiment for r in reports], rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("acceptances")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
