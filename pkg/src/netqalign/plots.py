"""Headless matplotlib rendering for CLI reports.

Each function writes one PNG next to the delimited output; none of them is
needed for the numerical results themselves.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def render_scores(columns, path, title):
    """Grouped bar chart of named score vectors over node index."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    names = list(columns)
    width = 0.8 / max(1, len(names))
    for i, name in enumerate(names):
        values = np.asarray(columns[name], dtype=float)
        ax.bar(np.arange(values.size) + i * width, values, width=width, label=name)
    ax.set_xlabel("node")
    ax.set_ylabel("score")
    ax.set_title(title)
    if len(names) > 1:
        ax.legend()
    _save(fig, path)


def render_score_matrix(matrix, path, title):
    """Heatmap of a pairwise score matrix."""
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(np.asarray(matrix, dtype=float), cmap="viridis")
    fig.colorbar(im, ax=ax, label="score")
    ax.set_xlabel("node of network 2")
    ax.set_ylabel("node of network 1")
    ax.set_title(title)
    _save(fig, path)


def render_phase_distribution(result, path):
    """Bar chart of the phase-code distribution of one simulation."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    probs = result.phase_distribution
    ax.bar(np.arange(probs.size), probs, width=0.9)
    ax.set_xlabel("phase code")
    ax.set_ylabel("probability")
    ax.set_title(
        f"phase distribution (kappa={result.kappa}, "
        f"P(code 0)={result.success_probability:.6f})"
    )
    ax.set_yscale("log")
    ax.set_ylim(bottom=1e-12)
    _save(fig, path)


def render_success_records(records, path):
    """Per-trial analytic vs simulated success probabilities, one panel per size."""
    sizes = sorted({r.size for r in records})
    fig, axes = plt.subplots(
        1, len(sizes), figsize=(3.2 * len(sizes), 3.2), sharey=True, squeeze=False
    )
    for ax, size in zip(axes[0], sizes):
        rows = sorted((r for r in records if r.size == size), key=lambda r: r.trial)
        trials = [r.trial for r in rows]
        ax.plot(trials, [r.beta_n_sq for r in rows], "o", ms=3, label="analytic")
        ax.plot(trials, [r.qpe_success for r in rows], "x", ms=4, label="simulated")
        ax.set_title(f"size {size}")
        ax.set_xlabel("trial")
    axes[0][0].set_ylabel("phase-0 success probability")
    axes[0][0].legend(loc="lower right", fontsize=8)
    _save(fig, path)


def render_size_trend(records, path):
    """Mean success probability against network size."""
    sizes = sorted({r.size for r in records})
    means = [np.mean([r.beta_n_sq for r in records if r.size == s]) for s in sizes]
    sims = [np.mean([r.qpe_success for r in records if r.size == s]) for s in sizes]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(sizes, means, "o-", label="analytic")
    ax.plot(sizes, sims, "x--", label="simulated")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("matrix size")
    ax.set_ylabel("mean phase-0 success probability")
    ax.legend()
    _save(fig, path)


def render_gap_fidelity(records, path):
    """Fidelity of the phase-0 conditional vector per gap and register width."""
    gaps = sorted({r.gap for r in records})
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for gap in gaps:
        rows = sorted((r for r in records if r.gap == gap), key=lambda r: r.kappa)
        ax.plot(
            [r.kappa for r in rows],
            [r.fidelity for r in rows],
            "o-",
            label=f"gap={gap:g}",
        )
    ax.set_xlabel("phase-register qubits")
    ax.set_ylabel("phase-0 fidelity")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    _save(fig, path)
