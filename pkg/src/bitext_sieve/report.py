"""Figure rendering for the report subcommands.

Figures land next to the delimited outputs. matplotlib is imported
lazily with the Agg backend so headless runs need no display.
"""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from .evaluate import PRPoint, StatsReport


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_pr_curve(points: Sequence[PRPoint], path: str | Path) -> Path:
    plt = _pyplot()
    path = Path(path)
    fig, (left, right) = plt.subplots(1, 2, figsize=(10, 4))
    left.plot([p.recall for p in points], [p.precision for p in points], marker="o")
    left.set_xlabel("recall")
    left.set_ylabel("precision")
    left.set_xlim(-0.02, 1.02)
    left.set_ylim(-0.02, 1.02)
    left.grid(True, alpha=0.3)
    thresholds = [p.threshold for p in points]
    right.plot(thresholds, [p.precision for p in points], label="precision")
    right.plot(thresholds, [p.recall for p in points], label="recall")
    right.set_xlabel("threshold")
    right.set_ylim(-0.02, 1.02)
    right.legend()
    right.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def render_score_histograms(report: StatsReport, path: str | Path) -> Path:
    plt = _pyplot()
    path = Path(path)
    names = list(report.histograms)
    fig, axes = plt.subplots(2, 2, figsize=(10, 7))
    for name, ax in zip(names, axes.flat):
        hist = report.histograms[name]
        widths = [b - a for a, b in zip(hist.edges, hist.edges[1:])]
        ax.bar(hist.edges[:-1], hist.counts, width=widths, align="edge")
        ax.set_title(f"{name} (zeroed {report.zero_fraction[name]:.1%})")
        ax.set_ylabel("pairs")
    fig.suptitle(f"{report.records} records")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
