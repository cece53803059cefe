"""Figures for scan reports, rendered off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .descartes import ScanReport  # noqa: E402


def plot_scan_histogram(report: ScanReport, path) -> None:
    """Bar chart of how many instances have each root count, with both bounds marked."""
    counts = report.histogram
    last = max((i for i, c in enumerate(counts) if c), default=0)
    xs = list(range(last + 1))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(xs, counts[: last + 1], color="#4c72b0")
    ax.set_yscale("log")
    ax.axvline(report.root_bound, color="#dd8452", linestyle="--", label=f"q^(1-1/(k-1)) = {report.root_bound:.2f}")
    ax.axvline(report.safe_bound, color="#c44e52", linestyle=":", label=f"2 q^(1-1/(k-1)) = {report.safe_bound:.2f}")
    ax.set_xlabel("roots in the order-q subgroup")
    ax.set_ylabel("instances")
    ax.set_title(f"k={report.k}, p={report.p}, q={report.q}: {report.instances} instances")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
