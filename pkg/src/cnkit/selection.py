"""Rank-based best-candidate selection.

Candidates are ranked per overlap metric (rank 1 = best, ties averaged),
aggregated by mean rank, and the minimum-mean-rank candidate wins within
each grouping: per model, per decoding, or per model-decoding cell.
"""

from dataclasses import dataclass
from enum import Enum

from scipy.stats import rankdata

from .metrics import MetricVector

METRIC_NAMES = ("rouge_l", "bleu1", "bleu3", "bleu4")


class GroupBy(Enum):
    MODEL = "model"
    DECODING = "decoding"
    MODEL_X_DECODING = "model-decoding"


@dataclass(frozen=True)
class CandidateCell:
    """All candidates generated for one HS under one model-decoding pair."""

    hs_id: str
    model_id: str
    decoding_id: str
    candidates: tuple  # of (text, MetricVector)

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("CandidateCell needs at least one candidate")


@dataclass(frozen=True)
class RankTable:
    ranks: dict  # metric name -> tuple of ranks
    mean_rank: tuple


@dataclass(frozen=True)
class Winner:
    hs_id: str
    group: str
    model_id: str
    decoding_id: str
    text: str
    metrics: MetricVector
    mean_rank: float


def rank_candidates(scored) -> RankTable:
    """Average-tie ranks per metric and their per-candidate mean."""
    scored = list(scored)
    if not scored:
        raise ValueError("nothing to rank")
    ranks = {}
    for name in METRIC_NAMES:
        values = [getattr(v, name) for v in scored]
        ranks[name] = tuple(rankdata([-v for v in values], method="average"))
    mean = tuple(
        sum(ranks[name][i] for name in METRIC_NAMES) / len(METRIC_NAMES)
        for i in range(len(scored)))
    return RankTable(ranks=ranks, mean_rank=mean)


def _group_key(cell, group_by):
    if group_by is GroupBy.MODEL:
        return cell.model_id
    if group_by is GroupBy.DECODING:
        return cell.decoding_id
    return f"{cell.model_id}+{cell.decoding_id}"


def select_best(pool, group_by: GroupBy):
    """Minimum-mean-rank winner per (hs, group).

    Ties on mean rank break by higher ROUGE-L, then higher BLEU-4, then
    lower candidate index in pooled order; the result is deterministic.
    """
    pool = list(pool)
    if not pool:
        raise ValueError("empty candidate pool")
    grouped = {}
    for cell in pool:
        key = (cell.hs_id, _group_key(cell, group_by))
        grouped.setdefault(key, []).append(cell)

    winners = []
    for (hs_id, group), cells in sorted(grouped.items()):
        entries = []  # (text, metrics, model, decoding)
        for cell in cells:
            for text, metrics in cell.candidates:
                entries.append((text, metrics, cell.model_id, cell.decoding_id))
        table = rank_candidates([m for _, m, _, _ in entries])
        best = min(
            range(len(entries)),
            key=lambda i: (table.mean_rank[i], -entries[i][1].rouge_l,
                           -entries[i][1].bleu4, i))
        text, metrics, model_id, decoding_id = entries[best]
        winners.append(Winner(hs_id=hs_id, group=group, model_id=model_id,
                              decoding_id=decoding_id, text=text,
                              metrics=metrics,
                              mean_rank=table.mean_rank[best]))
    return winners


def corpus_report(winners, training, window: int = 1000):
    """Per-group overlap means plus corpus diversity of the winning CNs."""
    from .metrics import DiversityReport, novelty, repetition_rate
    from .textkit import tokenize

    winners = list(winners)
    if not winners:
        raise ValueError("no winners to report on")
    training_seqs = [tokenize(t) if isinstance(t, str) else t for t in training]
    by_group = {}
    for w in winners:
        by_group.setdefault(w.group, []).append(w)

    rows = {}
    for group, members in sorted(by_group.items()):
        row = {}
        for name in METRIC_NAMES:
            row[name] = sum(getattr(w.metrics, name)
                            for w in members) / len(members)
        seqs = [tokenize(w.text) for w in members]
        rr = repetition_rate(seqs, window=window) if any(len(s) for s in seqs) else 0.0
        nov = novelty(seqs, training_seqs) if training_seqs else 0.0
        row["diversity"] = DiversityReport(rr=rr, nov=nov, window=window)
        rows[group] = row
    return rows


def report_to_tsv(rows):
    """Tables 1/2-style layout: rows are groups, columns metric families."""
    header = "\t".join(["group", "ROU", "B-1", "B-3", "B-4", "RR", "NOV"])
    lines = [header]
    for group, row in rows.items():
        div = row["diversity"]
        lines.append("\t".join([
            group,
            f"{row['rouge_l']:.4f}", f"{row['bleu1']:.4f}",
            f"{row['bleu3']:.4f}", f"{row['bleu4']:.4f}",
            f"{div.rr:.3f}", f"{div.nov:.3f}"]))
    return "\n".join(lines) + "\n"
