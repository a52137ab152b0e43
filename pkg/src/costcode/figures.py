"""Figure rendering for the CLI report paths (headless matplotlib)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def save_spectrum_figure(curve, path, title: str = "overflow spectrum") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(curve.thresholds, curve.probabilities, marker="o", lw=1.2, label=curve.method)
    if curve.lower is not None and curve.upper is not None:
        ax.fill_between(curve.thresholds, curve.lower, curve.upper, alpha=0.25, label="lattice bracket")
    elif curve.stderrs is not None:
        lo = [p - 2 * s for p, s in zip(curve.probabilities, curve.stderrs)]
        hi = [p + 2 * s for p, s in zip(curve.probabilities, curve.stderrs)]
        ax.fill_between(curve.thresholds, lo, hi, alpha=0.25, label="±2 stderr")
    ax.set_xlabel("threshold")
    ax.set_ylabel("tail probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_overflow_figure(results, path, title: str = "overflow vs threshold") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    etas = [r.eta for r in results]
    probs = [r.probability for r in results]
    ax.step(etas, probs, where="post", marker="o")
    for r in results:
        if r.stderr is not None:
            ax.errorbar([r.eta], [r.probability], yerr=[2 * r.stderr], fmt="none", ecolor="gray")
    ax.set_xlabel("cost threshold")
    ax.set_ylabel("overflow probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_diagnostic_figure(report, path, title: str = "inter-quantile gap") -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ns = [row[0] for row in report.rows]
    gaps = [row[3] for row in report.rows]
    ax.loglog(ns, gaps, marker="o", label=f"gap at delta={report.delta}")
    if report.expected_gap:
        ax.axhline(report.expected_gap, color="crimson", ls="--", lw=1,
                   label=f"entropy gap {report.expected_gap:.4g}")
    ax.set_xlabel("block length n")
    ax.set_ylabel("quantile gap")
    ax.set_title(f"{title} [{report.verdict}]")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_lemma_figure(bounds_rows, overflow_points, path, title: str = "spectrum sandwich") -> None:
    """Lemma bounds (per eta) and, when available, the exact overflow curve."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    etas = [b.eta for b in bounds_rows]
    ax.plot(etas, [b.lower for b in bounds_rows], ls="--", marker="v", label="lower bound")
    ax.plot(etas, [b.upper for b in bounds_rows], ls="--", marker="^", label="upper bound")
    if overflow_points:
        ax.plot([e for e, _ in overflow_points], [p for _, p in overflow_points],
                marker="o", lw=1.2, label="exact overflow")
    ax.set_xlabel("cost threshold")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
