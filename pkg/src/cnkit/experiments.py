"""Leave-one-target-out experiment harness and its statistical analyses."""

import math
from dataclasses import dataclass

from .corpus import LotoConfig, build_loto, loto_targets
from .decoding import DecodingConfig, Method, decode_text, generate_candidates
from .langmodel import train_ngram
from .metrics import novelty, repetition_rate, score_candidates
from .selection import (METRIC_NAMES, CandidateCell, GroupBy, select_best)
from .textkit import tokenize


def pearson(x, y) -> float:
    """Sample Pearson correlation coefficient."""
    x, y = list(x), list(y)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("pearson needs two equal-length series of >= 2 points")
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        raise ValueError("pearson is undefined for zero-variance input")
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    return sxy / math.sqrt(sxx * syy)


@dataclass(frozen=True)
class InfluenceMatrix:
    """Novelty of each LOTO test set against each training-target subset.

    Rows are training subsets, columns test targets; the diagonal is absent.
    """

    targets: tuple
    entries: dict  # (train_target, test_target) -> novelty

    def most_influential(self, test_target):
        candidates = [(t, self.entries[(t, test_target)])
                      for t in self.targets if t != test_target]
        return min(candidates, key=lambda kv: (kv[1], kv[0].value))[0]


def influence_matrix(train_subsets, test_references) -> InfluenceMatrix:
    """Cross-target novelty table.

    ``train_subsets`` and ``test_references`` map each target to its CN
    texts (or token sequences).
    """
    targets = tuple(sorted(train_subsets, key=lambda t: t.value))
    if len(targets) < 2:
        raise ValueError("influence matrix needs at least two targets")
    tokenized_train = {}
    for t, texts in train_subsets.items():
        seqs = [tokenize(s) if isinstance(s, str) else s for s in texts]
        if not seqs:
            raise ValueError(f"empty training subset for {t.value}")
        tokenized_train[t] = seqs
    entries = {}
    for test_t in targets:
        refs = [tokenize(s) if isinstance(s, str) else s
                for s in test_references[test_t]]
        for train_t in targets:
            if train_t == test_t:
                continue
            entries[(train_t, test_t)] = novelty(refs, tokenized_train[train_t])
    return InfluenceMatrix(targets=targets, entries=entries)


@dataclass
class LotoTargetResult:
    target: object
    overlap_means: dict
    rr_candidates: float
    rr_references: float
    nov_candidates: float
    winner_texts: list


@dataclass
class CorrelationReport:
    overlap_with_influential: dict    # metric -> r
    overlap_without_influential: dict  # metric -> r
    candidate_reference_novelty: dict  # decoding label -> r


@dataclass
class LotoReport:
    per_decoding: dict  # decoding label -> {target -> LotoTargetResult}
    influence: InfluenceMatrix
    reference_novelty_influential: dict
    reference_novelty_without: dict
    correlations: CorrelationReport


def default_provider_factory(order=3):
    """Desk-scale stand-in for a fine-tuned LM: an n-gram model trained on
    the prompt-framed training pairs."""

    def factory(train_records):
        corpus = [tokenize(f"HS {r.hs} CN {r.cn}") for r in train_records]
        return train_ngram(corpus, order=order)

    return factory


def default_decoding_configs(seed=0, max_len=128):
    return [
        ("topk", DecodingConfig(method=Method.TOP_K, seed=seed,
                                max_len=max_len, repetition_penalty=2.0)),
        ("bs", DecodingConfig(method=Method.BS, beams=5, max_len=max_len,
                              repetition_penalty=2.0)),
    ]


def _target_subsets(train_records):
    subsets = {}
    for rec in train_records:
        for t in rec.targets:
            subsets.setdefault(t, []).append(rec.cn)
    return subsets


def loto_run(records, provider_factory=None, configs=None, targets=None,
             quota=600, seed=0, n=5, rr_window=1000):
    """Run the full LOTO experiment over a dataset.

    For each left-out target: build the LOTO sets, train (or fetch) a
    provider on the training half, generate n candidates per test HS for
    each decoding configuration, select the best per HS, and compute the
    overlap/diversity tables. Then derive the influence matrix from the
    training subsets, the two reference-novelty series, and the Pearson
    correlations against the overlap metrics. Overlap correlations use the
    first decoding configuration.
    """
    provider_factory = provider_factory or default_provider_factory()
    configs = configs or default_decoding_configs(seed=seed)
    targets = targets or loto_targets()

    per_decoding = {label: {} for label, _ in configs}
    subsets_per_config = {}
    test_refs_by_target = {}

    for left_out in targets:
        config = LotoConfig(left_out=left_out, per_target_quota=quota,
                            seed=seed)
        train, test = build_loto(records, config)
        provider = provider_factory(train)
        train_cn_seqs = [tokenize(r.cn) for r in train]
        test_refs_by_target[left_out] = [r.cn for r in test]
        subsets_per_config[left_out] = _target_subsets(train)

        for label, dconfig in configs:
            winners = []
            for rec in test:
                results = generate_candidates(provider, rec.hs, dconfig, n=n)
                texts = [decode_text(provider.vocabulary, r) for r in results]
                vectors = score_candidates(texts, rec.cn)
                cell = CandidateCell(hs_id=rec.id, model_id="loto",
                                     decoding_id=label,
                                     candidates=tuple(zip(texts, vectors)))
                winners.extend(select_best([cell], GroupBy.MODEL_X_DECODING))
            overlap = {name: sum(getattr(w.metrics, name) for w in winners)
                       / len(winners) for name in METRIC_NAMES}
            winner_seqs = [tokenize(w.text) for w in winners]
            ref_seqs = [tokenize(r.cn) for r in test]
            result = LotoTargetResult(
                target=left_out,
                overlap_means=overlap,
                rr_candidates=repetition_rate(winner_seqs, window=rr_window)
                if any(len(s) for s in winner_seqs) else 0.0,
                rr_references=repetition_rate(ref_seqs, window=rr_window),
                nov_candidates=novelty(winner_seqs, train_cn_seqs),
                winner_texts=[w.text for w in winners],
            )
            per_decoding[label][left_out] = result

    # influence entries use each test target's own LOTO training subsets
    ordered_targets = tuple(sorted(targets, key=lambda t: t.value))
    entries = {}
    for test_t in ordered_targets:
        refs = [tokenize(s) for s in test_refs_by_target[test_t]]
        for train_t in ordered_targets:
            if train_t == test_t:
                continue
            subset = [tokenize(s)
                      for s in subsets_per_config[test_t][train_t]]
            entries[(train_t, test_t)] = novelty(refs, subset)
    matrix = InfluenceMatrix(targets=ordered_targets, entries=entries)

    ref_nov_with = {}
    ref_nov_without = {}
    for left_out in targets:
        influential = matrix.most_influential(left_out)
        refs = [tokenize(s) for s in test_refs_by_target[left_out]]
        ref_nov_with[left_out] = matrix.entries[(influential, left_out)]
        rest = [tokenize(s) for t, cns in subsets_per_config[left_out].items()
                if t != influential for s in cns]
        ref_nov_without[left_out] = novelty(refs, rest) if rest else 1.0

    primary_label = configs[0][0]
    ordered = list(targets)
    overlap_with = {}
    overlap_without = {}
    for name in METRIC_NAMES:
        ys = [per_decoding[primary_label][t].overlap_means[name]
              for t in ordered]
        overlap_with[name] = pearson(
            [ref_nov_with[t] for t in ordered], ys)
        overlap_without[name] = pearson(
            [ref_nov_without[t] for t in ordered], ys)

    cand_ref_nov = {}
    for label, _ in configs:
        cand_ref_nov[label] = pearson(
            [ref_nov_with[t] for t in ordered],
            [per_decoding[label][t].nov_candidates for t in ordered])

    correlations = CorrelationReport(
        overlap_with_influential=overlap_with,
        overlap_without_influential=overlap_without,
        candidate_reference_novelty=cand_ref_nov,
    )
    return LotoReport(per_decoding=per_decoding, influence=matrix,
                      reference_novelty_influential=ref_nov_with,
                      reference_novelty_without=ref_nov_without,
                      correlations=correlations)


# ---------------------------------------------------------------------------
# report emission

def loto_table_tsv(results):
    """Table 3-style layout: one row per LOTO target."""
    lines = ["target\tROU\tB-1\tB-3\tB-4\tRR\tNOV"]
    for target, r in sorted(results.items(), key=lambda kv: kv[0].value):
        o = r.overlap_means
        lines.append("\t".join([
            target.value, f"{o['rouge_l']:.4f}", f"{o['bleu1']:.4f}",
            f"{o['bleu3']:.4f}", f"{o['bleu4']:.4f}",
            f"{r.rr_candidates:.3f}", f"{r.nov_candidates:.3f}"]))
    return "\n".join(lines) + "\n"


def influence_table_tsv(matrix: InfluenceMatrix):
    """Table 9-style layout: training subsets as rows, test targets as
    columns, diagonal dashed."""
    header = "training\\generation\t" + "\t".join(
        t.value for t in matrix.targets)
    lines = [header]
    for train_t in matrix.targets:
        cells = []
        for test_t in matrix.targets:
            if train_t == test_t:
                cells.append("-")
            else:
                cells.append(f"{matrix.entries[(train_t, test_t)]:.3f}")
        lines.append(train_t.value + "\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"


def rr_comparison_tsv(results):
    """Table 10-style layout: reference vs candidate RR per target."""
    lines = ["target\tRR_reference\tRR_candidate"]
    for target, r in sorted(results.items(), key=lambda kv: kv[0].value):
        lines.append(f"{target.value}\t{r.rr_references:.3f}"
                     f"\t{r.rr_candidates:.3f}")
    return "\n".join(lines) + "\n"


def correlation_scatter_points(report: LotoReport, metric: str):
    """(x, y) pairs behind the correlation plots: reference novelty against
    a per-target overlap mean, for both novelty series."""
    primary = next(iter(report.per_decoding))
    ordered = sorted(report.reference_novelty_influential,
                     key=lambda t: t.value)
    with_series = [(report.reference_novelty_influential[t],
                    report.per_decoding[primary][t].overlap_means[metric])
                   for t in ordered]
    without_series = [(report.reference_novelty_without[t],
                       report.per_decoding[primary][t].overlap_means[metric])
                      for t in ordered]
    return with_series, without_series
