"""Figure rendering for campaign summaries.

Renders the report's histogram tables as PNG files next to the delimited
output.  matplotlib is imported lazily and driven through the Agg backend,
so nothing here needs a display.
"""

from __future__ import annotations

from pathlib import Path

from .campaign import Summary


def _axes(title: str, xlabel: str, ylabel: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return fig, ax


def _save(fig, path: Path) -> Path:
    import os

    import matplotlib.pyplot as plt

    tmp = path.with_name(path.name + ".tmp")
    try:
        fig.tight_layout()
        fig.savefig(tmp, dpi=120, format="png")
        os.replace(tmp, path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise
    finally:
        plt.close(fig)
    return path


def render_outcomes(summary: Summary, path: Path) -> Path:
    fig, ax = _axes("Trial outcomes", "outcome", "trials")
    names = list(summary.outcome_counts)
    ax.bar(range(len(names)), [summary.outcome_counts[n] for n in names], color="#3465a4")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    return _save(fig, path)


def render_cluster_fails(summary: Summary, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, fails, label in (
        (axes[0], summary.cluster1_fails, "cluster #1"),
        (axes[1], summary.cluster2_fails, "cluster #2"),
    ):
        codes = [c for c in fails if c != 0]
        ax.bar(codes, [fails[c] for c in codes], width=1.0, color="#cc0000")
        ax.set_title(f"Fail codes, {label}")
        ax.set_xlabel("fail code (unit index + 1)")
    axes[0].set_ylabel("trials")
    return _save(fig, path)


def render_flt_sig(summary: Summary, path: Path) -> Path:
    fig, ax = _axes("Fault signature distribution", "flt_sig", "trials")
    values = [v for v in summary.flt_sig_hist if v != 0]
    ax.bar(values, [summary.flt_sig_hist[v] for v in values], width=max(1.0, len(values) / 50), color="#f57900")
    return _save(fig, path)


def render_detection(summary: Summary, path: Path) -> Path:
    fig, ax = _axes("Detection rate per detector", "detector", "rate")
    names = list(summary.detection_rates)
    ax.bar(range(len(names)), [summary.detection_rates[n] for n in names], color="#4e9a06")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, fontsize=8)
    ax.set_ylim(0, 1.05)
    return _save(fig, path)


def render_summary_figures(summary: Summary, outdir: str | Path) -> list[Path]:
    """Render every summary figure into ``outdir``; returns the files written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return [
        render_outcomes(summary, outdir / "outcomes.png"),
        render_cluster_fails(summary, outdir / "cluster_fails.png"),
        render_flt_sig(summary, outdir / "flt_sig.png"),
        render_detection(summary, outdir / "detection.png"),
    ]
