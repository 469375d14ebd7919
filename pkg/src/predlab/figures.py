"""File-based matplotlib renderings of run and analysis reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import Classification, EvaluationReport

_CLASS_COLOURS = {
    Classification.CORRECT: "#2a9d3f",
    Classification.INCORRECT: "#d62728",
    Classification.WITHHELD: "#9aa0a6",
}


def save_trial_figure(report: EvaluationReport, path, title: str = "") -> None:
    """Outcome timeline with per-trial classification and running correct count."""
    if report.trials is None:
        raise ValueError("report carries no per-trial log; rerun with recording on")
    trials = report.trials
    idx = np.array([t.index for t in trials])
    outcomes = np.array([t.outcome for t in trials])
    colours = [_CLASS_COLOURS[t.classification] for t in trials]
    running = np.cumsum([t.classification is Classification.CORRECT for t in trials])

    fig, (ax_out, ax_cum) = plt.subplots(
        2, 1, figsize=(8, 4.5), sharex=True, height_ratios=(2, 1)
    )
    shown = min(len(idx), 512)
    ax_out.scatter(idx[:shown], outcomes[:shown], c=colours[:shown], s=14, zorder=3)
    ax_out.step(idx[:shown], outcomes[:shown], where="mid", lw=0.6, color="0.8", zorder=2)
    ax_out.set_ylabel("outcome")
    ax_out.set_yticks((0, 1))
    ax_out.set_title(title or f"verdict {report.verdict.value} in {report.n_used} trials")
    for cls, colour in _CLASS_COLOURS.items():
        ax_out.scatter([], [], c=colour, s=14, label=cls.value)
    ax_out.legend(loc="center right", fontsize=8, frameon=False)

    ax_cum.plot(idx, running, lw=1.2)
    ax_cum.axhline(report.k, ls="--", lw=0.8, color="0.4")
    ax_cum.set_ylabel("correct")
    ax_cum.set_xlabel("trial")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_normality_figure(report, path, title: str = "") -> None:
    """Per-block-length max deviation against its acceptance threshold."""
    lens = [r.block_len for r in report.results]
    devs = [r.max_deviation for r in report.results]
    epss = [r.epsilon for r in report.results]
    colours = ["#2a9d3f" if r.passed else "#d62728" for r in report.results]

    fig, ax = plt.subplots(figsize=(6, 3.6))
    xs = np.arange(len(lens))
    ax.bar(xs, devs, width=0.55, color=colours, label="max |freq - 2^-l|")
    ax.plot(xs, epss, "k_", markersize=26, label="eps(l, n)")
    ax.set_xticks(xs)
    ax.set_xticklabels([str(l) for l in lens])
    ax.set_xlabel("block length l")
    ax.set_ylabel("deviation")
    ax.set_yscale("log")
    verdict = "pass" if report.passed else "fail"
    ax.set_title(title or f"block statistics over {report.n} bits: {verdict}")
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_cycle_figure(seq, report, path, title: str = "") -> None:
    """Leading bits with the transient shaded and one period bracketed."""
    bits = [int(b) for b in str(seq)][: min(report.bound, 256)]
    xs = np.arange(1, len(bits) + 1)

    fig, ax = plt.subplots(figsize=(8, 2.6))
    ax.step(xs, bits, where="mid", lw=0.9)
    ax.set_yticks((0, 1))
    ax.set_xlabel("position")
    ax.set_ylabel("bit")
    if report.found:
        if report.transient:
            ax.axvspan(0.5, report.transient + 0.5, color="#f4c761", alpha=0.35)
        start = report.transient + 0.5
        ax.axvspan(start, start + report.period, color="#7bb3de", alpha=0.35)
        label = f"transient {report.transient}, period {report.period}"
    else:
        label = f"no cycle within bound {report.bound}"
    ax.set_title(title or label)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_running_frequency_figure(
    outcomes, expected: float, path, title: str = ""
) -> None:
    """Running mean of a bit sequence against its expected limit."""
    values = np.asarray(list(outcomes), dtype=float)
    running = np.cumsum(values) / np.arange(1, len(values) + 1)

    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(np.arange(1, len(values) + 1), running, lw=1.0)
    ax.axhline(expected, ls="--", lw=0.9, color="0.3")
    ax.set_xlabel("trial")
    ax.set_ylabel("frequency of 1")
    ax.set_xscale("log")
    ax.set_title(title or f"running frequency vs expected {expected:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
