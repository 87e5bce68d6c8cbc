"""Matplotlib figures for reports: circuit diagrams and outcome histograms.

Figures are written straight to files with the Agg backend.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402

from .fqc import MCU, FqcMorphism  # noqa: E402
from .render import _labels, gate_name  # noqa: E402


def circuit_figure(m: FqcMorphism, path: str | Path, title: str = "",
                   input_names: list[str] | None = None) -> Path:
    """Wire diagram: heap wires start at ``|0>``, garbage wires end in a cross."""
    n = max(m.wires, 1)
    gates = m.circuit.gates
    width = max(4.0, 0.6 * len(gates) + 2.5)
    fig, ax = plt.subplots(figsize=(width, 0.55 * n + 1.0))
    left, right = _labels(m, input_names)
    xend = len(gates) + 1
    for w in range(m.wires):
        y = -w
        ax.plot([0, xend], [y, y], color="0.3", lw=1, zorder=1)
        ax.text(-0.2, y, left[w], ha="right", va="center", family="monospace", fontsize=9)
        if w < m.out_wires:
            ax.text(xend + 0.2, y, right[w], ha="left", va="center", family="monospace", fontsize=9)
        else:
            ax.plot([xend], [y], marker="x", color="firebrick", ms=8, zorder=3)
    for k, g in enumerate(gates, start=1):
        if isinstance(g, MCU):
            ys = [-w for w in g.wires()]
            ax.plot([k, k], [min(ys), max(ys)], color="k", lw=1, zorder=2)
            for w, pol in g.controls:
                ax.plot([k], [-w], marker="o", ms=6, zorder=3,
                        color="k", markerfacecolor="k" if pol else "white")
            ax.text(k, -g.target, gate_name(g.u), ha="center", va="center", zorder=4,
                    fontsize=8, bbox=dict(boxstyle="square,pad=0.25", fc="white", ec="k"))
        else:
            for i, j in enumerate(g.mapping):
                if i != j:
                    ax.plot([k - 0.35, k + 0.35], [-i, -j], color="tab:blue", lw=1, zorder=2)
    ax.set_xlim(-1.2, xend + 1.2)
    ax.set_ylim(-m.wires + 0.4, 0.6)
    ax.axis("off")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def outcome_figure(outcomes: list[tuple[str, float]], path: str | Path, title: str = "") -> Path:
    """Bar chart of measurement probabilities in the computational basis."""
    labels = [v for v, _ in outcomes]
    probs = [p for _, p in outcomes]
    fig, ax = plt.subplots(figsize=(max(3.5, 0.9 * len(labels) + 1.5), 3.0))
    ax.bar(range(len(labels)), probs, color="tab:blue")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30 if len(labels) > 3 else 0, ha="right" if len(labels) > 3 else "center",
                       family="monospace", fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("probability")
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
