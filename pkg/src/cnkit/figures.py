"""Matplotlib renderings for the report path.

Figures are written next to the delimited tables; everything uses the Agg
backend so reports render headlessly.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .selection import METRIC_NAMES  # noqa: E402

METRIC_LABELS = {"rouge_l": "ROU", "bleu1": "B-1", "bleu3": "B-3",
                 "bleu4": "B-4"}


def overlap_bars(rows, path):
    """Grouped bar chart of per-group overlap means."""
    groups = list(rows)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / len(METRIC_NAMES)
    for i, metric in enumerate(METRIC_NAMES):
        xs = [g + i * width for g in range(len(groups))]
        ys = [rows[g][metric] for g in groups]
        ax.bar(xs, ys, width=width, label=METRIC_LABELS[metric])
    ax.set_xticks([g + 1.5 * width for g in range(len(groups))])
    ax.set_xticklabels(groups, rotation=30, ha="right")
    ax.set_ylabel("overlap score")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def diversity_scatter(rows, path):
    """RR against NOV per group."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for group, row in rows.items():
        div = row["diversity"]
        ax.scatter(div.rr, div.nov, label=group)
        ax.annotate(group, (div.rr, div.nov), fontsize=8,
                    xytext=(3, 3), textcoords="offset points")
    ax.set_xlabel("repetition rate (%)")
    ax.set_ylabel("novelty")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def correlation_scatter(with_series, without_series, metric_label, path):
    """Reference novelty vs overlap, with and without the influential
    training subset."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    if with_series:
        xs, ys = zip(*sorted(with_series))
        ax.plot(xs, ys, "o-", color="tab:blue",
                label="most influential subset")
    if without_series:
        xs, ys = zip(*sorted(without_series))
        ax.plot(xs, ys, "^-", color="tab:blue", alpha=0.45,
                label="without influential subset")
    ax.set_xlabel("reference CN novelty")
    ax.set_ylabel(metric_label)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
