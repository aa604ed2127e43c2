"""Deterministic text primitives shared by every metric in the toolkit.

One tokenizer serves BLEU, ROUGE, repetition rate, novelty and TER so that
the scores stay mutually consistent.
"""

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

EM_DASH = "—"
_PUNCT = ".,;:!?\"'()[]" + EM_DASH
_TOKEN_RE = re.compile(r"[.,;:!?\"'()\[\]—]|[^\s.,;:!?\"'()\[\]—]+")


@dataclass(frozen=True)
class TokenSeq:
    """An ordered list of tokens together with the text it came from."""

    tokens: tuple
    source: str = ""

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]


def tokenize(text: str) -> TokenSeq:
    """Lowercase, NFC-normalize and split on whitespace, detaching punctuation.

    The punctuation classes .,;:!?"'()[] and the em-dash each become a
    separate single-character token. Empty text yields an empty sequence.
    """
    normalized = unicodedata.normalize("NFC", text).lower()
    tokens = tuple(_TOKEN_RE.findall(normalized))
    return TokenSeq(tokens=tokens, source=text)


@dataclass
class NgramCounts:
    order: int
    counts: Counter = field(default_factory=Counter)

    def total(self):
        return sum(self.counts.values())


def ngrams(seq, n: int) -> NgramCounts:
    """All contiguous n-grams of ``seq`` with multiplicities."""
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    tokens = tuple(seq)
    counts = Counter(tokens[i:i + n] for i in range(len(tokens) - n + 1))
    return NgramCounts(order=n, counts=counts)


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two token sequences."""
    xs, ys = tuple(a), tuple(b)
    if not xs or not ys:
        return 0
    # single-row DP
    prev = [0] * (len(ys) + 1)
    for x in xs:
        cur = [0] * (len(ys) + 1)
        for j, y in enumerate(ys, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def edit_distance(a, b) -> int:
    """Word-level Levenshtein distance (unit costs)."""
    xs, ys = tuple(a), tuple(b)
    prev = list(range(len(ys) + 1))
    for i, x in enumerate(xs, start=1):
        cur = [i] + [0] * len(ys)
        for j, y in enumerate(ys, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def _apply_shift(tokens, start, length, dest):
    block = tokens[start:start + length]
    rest = tokens[:start] + tokens[start + length:]
    return rest[:dest] + block + rest[dest:]


def _best_single_shift(tokens, ref_tokens, current):
    """The single block shift reducing edit distance the most, if any.

    Returns (new_tokens, new_distance) or None when no shift improves.
    """
    best = None
    best_dist = current
    n = len(tokens)
    for length in range(1, n):
        for start in range(0, n - length + 1):
            for dest in range(0, n - length + 1):
                if dest == start:
                    continue
                shifted = _apply_shift(tokens, start, length, dest)
                d = edit_distance(shifted, ref_tokens)
                if d < best_dist:
                    best_dist = d
                    best = shifted
    if best is None:
        return None
    return best, best_dist


MAX_SHIFT_ITERATIONS = 50


def ter(candidate, reference) -> float:
    """Translation Error Rate with greedy block-shift search.

    Repeatedly applies the single block shift that most reduces the word
    edit distance (each shift costs one edit), then charges the remaining
    edit distance; the result is divided by the reference length. Shift
    iterations are capped at 50.
    """
    ref_tokens = tuple(reference)
    if not ref_tokens:
        raise ValueError("TER reference must be non-empty")
    tokens = tuple(candidate)
    shifts = 0
    dist = edit_distance(tokens, ref_tokens)
    while dist > 0 and shifts < MAX_SHIFT_ITERATIONS:
        improved = _best_single_shift(tokens, ref_tokens, dist)
        if improved is None:
            break
        tokens, dist = improved
        shifts += 1
    return (shifts + dist) / len(ref_tokens)


def ter_text(candidate: str, reference: str) -> float:
    """TER over raw texts through the shared tokenizer."""
    return ter(tokenize(candidate), tokenize(reference))
