"""Automatic evaluation metrics: overlap, diversity, and syntactic measures.

All word-based metrics run on the shared tokenizer from :mod:`cnkit.textkit`.
"""

import math
from dataclasses import dataclass

from .textkit import lcs_length, ngrams, tokenize


@dataclass(frozen=True)
class MetricVector:
    """Per-candidate overlap scores against the gold reference."""

    rouge_l: float
    bleu1: float
    bleu3: float
    bleu4: float

    def as_dict(self):
        return {
            "rouge_l": self.rouge_l,
            "bleu1": self.bleu1,
            "bleu3": self.bleu3,
            "bleu4": self.bleu4,
        }


@dataclass(frozen=True)
class DiversityReport:
    rr: float
    nov: float
    window: int


@dataclass(frozen=True)
class SyntacticReport:
    msd: int
    asd: float
    nst: int


def _clipped_precision(candidate, reference, order, smooth):
    """Modified n-gram precision with optional add-1 smoothing."""
    cand_counts = ngrams(candidate, order).counts
    ref_counts = ngrams(reference, order).counts
    clipped = sum(min(c, ref_counts[g]) for g, c in cand_counts.items())
    total = sum(cand_counts.values())
    if smooth:
        return (clipped + 1) / (total + 1)
    if total == 0:
        return 0.0
    return clipped / total


def bleu_n(candidate, reference, n: int) -> float:
    """Sentence-level BLEU with uniform weights over orders 1..n.

    Brevity penalty exp(1 - ref_len/cand_len) applies when the candidate is
    shorter than the reference. Orders >= 2 get add-1 smoothing on both
    numerator and denominator; order 1 is unsmoothed. An empty candidate
    scores 0, an empty reference is an error.
    """
    if len(reference) == 0:
        raise ValueError("BLEU reference must be non-empty")
    if n < 1:
        raise ValueError("BLEU order must be >= 1")
    if len(candidate) == 0:
        return 0.0
    log_sum = 0.0
    for order in range(1, n + 1):
        p = _clipped_precision(candidate, reference, order, smooth=order >= 2)
        if p == 0.0:
            return 0.0
        log_sum += math.log(p)
    if len(candidate) < len(reference):
        bp = math.exp(1.0 - len(reference) / len(candidate))
    else:
        bp = 1.0
    return bp * math.exp(log_sum / n)


def rouge_l(candidate, reference) -> float:
    """LCS F1: P = LCS/|cand|, R = LCS/|ref|, F = 2PR/(P+R)."""
    if len(candidate) == 0 or len(reference) == 0:
        raise ValueError("ROUGE-L inputs must be non-empty")
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return 2 * p * r / (p + r)


RR_ORDERS = (1, 2, 3, 4)


def _window_slices(tokens, window):
    full, tail = divmod(len(tokens), window)
    slices = [tokens[i * window:(i + 1) * window] for i in range(full)]
    tail_tokens = tokens[full * window:]
    if tail_tokens and (full == 0 or tail >= window / 2):
        slices.append(tail_tokens)
    return slices


def repetition_rate(corpus, window: int = 1000) -> float:
    """Corpus repetition rate as a percentage.

    The corpus is concatenated in order and cut into non-overlapping windows
    (a final partial window is kept when it holds at least half a window).
    Per window and per n in 1..4 the fraction of non-singleton n-gram types
    is taken; the four per-order averages are combined by geometric mean and
    scaled by 100.
    """
    tokens = tuple(t for seq in corpus for t in seq)
    if not tokens:
        raise ValueError("repetition_rate needs a non-empty corpus")
    slices = _window_slices(tokens, window)
    product = 1.0
    for order in RR_ORDERS:
        fractions = []
        for chunk in slices:
            counts = ngrams(chunk, order).counts
            if not counts:
                continue
            non_singleton = sum(1 for c in counts.values() if c > 1)
            fractions.append(non_singleton / len(counts))
        avg = sum(fractions) / len(fractions) if fractions else 0.0
        product *= avg
    return 100.0 * product ** (1.0 / len(RR_ORDERS))


def jaccard(a: set, b: set) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def novelty(generated, training) -> float:
    """Mean over generated CNs of 1 - max Jaccard against any training CN.

    Jaccard runs on unigram token sets.
    """
    training_sets = [set(t) for t in training]
    if not training_sets:
        raise ValueError("novelty needs a non-empty training corpus")
    scores = []
    for g in generated:
        gset = set(g)
        scores.append(1.0 - max(jaccard(gset, t) for t in training_sets))
    return sum(scores) / len(scores) if scores else 0.0


@dataclass(frozen=True)
class ParsedCn:
    """Dependency parses for one CN: per sentence, 1-based head indices.

    Head 0 marks the sentence root.
    """

    sentences: tuple


def _token_depths(heads):
    depths = []
    for i in range(len(heads)):
        depth = 0
        node = i + 1
        seen = set()
        while heads[node - 1] != 0:
            if node in seen:
                raise ValueError("cyclic dependency tree")
            seen.add(node)
            node = heads[node - 1]
            depth += 1
            if not 1 <= node <= len(heads):
                raise ValueError("head index out of range")
        depths.append(depth)
    return depths


def syntactic_metrics(parsed: ParsedCn) -> SyntacticReport:
    """Max/average sentence depth and sentence count from dependency trees."""
    if not parsed.sentences:
        raise ValueError("ParsedCn has no sentences")
    sentence_depths = []
    for heads in parsed.sentences:
        if sum(1 for h in heads if h == 0) != 1:
            raise ValueError("each sentence needs exactly one root")
        sentence_depths.append(max(_token_depths(heads)))
    return SyntacticReport(
        msd=max(sentence_depths),
        asd=sum(sentence_depths) / len(sentence_depths),
        nst=len(sentence_depths),
    )


def score_candidates(candidates, reference: str):
    """One MetricVector per candidate text, against one gold reference."""
    ref = tokenize(reference)
    if len(ref) == 0:
        raise ValueError("reference must be non-empty")
    vectors = []
    for text in candidates:
        cand = tokenize(text)
        if len(cand) == 0:
            vectors.append(MetricVector(0.0, 0.0, 0.0, 0.0))
            continue
        vectors.append(MetricVector(
            rouge_l=rouge_l(cand, ref),
            bleu1=bleu_n(cand, ref, 1),
            bleu3=bleu_n(cand, ref, 3),
            bleu4=bleu_n(cand, ref, 4),
        ))
    return vectors
