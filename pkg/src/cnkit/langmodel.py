"""Next-token distribution providers.

Two providers are available: a built-in stupid-backoff n-gram model for
desk-scale runs, and a client for external models speaking a line-delimited
JSON protocol. Both expose the same contract: a vocabulary plus a
``next_distribution(context)`` returning a normalized probability vector.
"""

import json
import math
import socket
from collections import Counter
from dataclasses import dataclass

import numpy as np

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)

BACKOFF_FACTOR = 0.4
UNIGRAM_FLOOR = 0.01
PROTO_VERSION = 1


class LmError(RuntimeError):
    pass


class BridgeError(LmError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple

    def __post_init__(self):
        for reserved in RESERVED:
            if self.tokens.count(reserved) != 1:
                raise LmError(f"vocabulary must contain {reserved} exactly once")

    @classmethod
    def from_corpus(cls, corpus):
        seen = sorted({t for seq in corpus for t in seq} - set(RESERVED))
        return cls(tokens=RESERVED + tuple(seen))

    def __len__(self):
        return len(self.tokens)

    @property
    def bos(self):
        return self.tokens.index(BOS)

    @property
    def eos(self):
        return self.tokens.index(EOS)

    @property
    def unk(self):
        return self.tokens.index(UNK)

    def index(self, token):
        try:
            return self.tokens.index(token)
        except ValueError:
            return self.unk

    def encode(self, tokens):
        lookup = {t: i for i, t in enumerate(self.tokens)}
        unk = self.unk
        return [lookup.get(t, unk) for t in tokens]

    def decode(self, indices):
        return [self.tokens[i] for i in indices]


def check_distribution(probs, size):
    probs = np.asarray(probs, dtype=float)
    if probs.shape != (size,):
        raise LmError(f"distribution length {probs.shape} != vocab size {size}")
    if (probs < 0).any():
        raise LmError("distribution has negative entries")
    if abs(float(probs.sum()) - 1.0) > 1e-9:
        raise LmError(f"distribution sums to {probs.sum()}, not 1")
    return probs


class NgramLm:
    """Stupid-backoff n-gram model over token indices.

    Backoff factor 0.4 between orders, with an add-0.01 floor at the
    unigram level; the per-context scores are renormalized into a proper
    distribution.
    """

    def __init__(self, vocabulary, order=3):
        if order < 1:
            raise LmError("order must be >= 1")
        self.vocabulary = vocabulary
        self.order = order
        self._grams = {n: Counter() for n in range(1, order + 1)}
        self._prefixes = {n: Counter() for n in range(1, order + 1)}
        self._total = 0

    def observe(self, indices):
        padded = [self.vocabulary.bos] + list(indices) + [self.vocabulary.eos]
        for n in range(1, self.order + 1):
            for i in range(len(padded) - n + 1):
                gram = tuple(padded[i:i + n])
                self._grams[n][gram] += 1
                self._prefixes[n][gram[:-1]] += 1
        self._total += len(padded) - 1  # BOS is context only

    def _score(self, token, context):
        if context:
            n = len(context) + 1
            count = self._grams[n][context + (token,)]
            if count > 0:
                return count / self._prefixes[n][context]
            return BACKOFF_FACTOR * self._score(token, context[1:])
        count = self._grams[1][(token,)] if token != self.vocabulary.bos else 0
        v = len(self.vocabulary)
        return (count + UNIGRAM_FLOOR) / (self._total + UNIGRAM_FLOOR * v)

    def next_distribution(self, context):
        ctx = tuple(context[-(self.order - 1):]) if self.order > 1 else ()
        scores = np.array([self._score(w, ctx)
                           for w in range(len(self.vocabulary))])
        return scores / scores.sum()


def train_ngram(corpus, order=3, vocabulary=None):
    """Train a stupid-backoff model on tokenized sentences."""
    corpus = list(corpus)
    if not corpus:
        raise LmError("training corpus is empty")
    vocab = vocabulary or Vocabulary.from_corpus(corpus)
    model = NgramLm(vocab, order=order)
    for seq in corpus:
        model.observe(vocab.encode(list(seq)))
    return model


def next_distribution(model, context):
    """Provider contract: validated distribution for a token-index context."""
    size = len(model.vocabulary)
    for idx in context:
        if not 0 <= idx < size:
            raise LmError(f"context index {idx} out of vocabulary")
    return check_distribution(model.next_distribution(list(context)), size)


def sequence_log_prob(model, indices):
    """Sum of step log-probabilities of a token-index sequence."""
    total = 0.0
    context = []
    for idx in indices:
        probs = next_distribution(model, context)
        total += math.log(float(probs[idx]))
        context.append(idx)
    return total


# ---------------------------------------------------------------------------
# bridge to external models

class BridgeProvider:
    """Client for an external model over line-delimited JSON frames.

    The vocabulary is exchanged once at handshake; each step sends the
    context and receives a probability vector. Slightly unnormalized
    replies are renormalized and counted in ``renormalized_frames``.
    """

    def __init__(self, reader, writer):
        self._reader = reader
        self._writer = writer
        self.renormalized_frames = 0
        self.vocabulary = self._handshake()

    def _send(self, obj):
        self._writer.write((json.dumps(obj) + "\n").encode("utf-8"))
        self._writer.flush()

    def _recv(self):
        line = self._reader.readline()
        if not line:
            raise BridgeError("remote closed the connection")
        try:
            frame = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"malformed frame: {line[:200]!r}") from exc
        if isinstance(frame, dict) and "err" in frame:
            raise BridgeError(f"remote error: {frame['err']}")
        return frame

    def _handshake(self):
        self._send({"proto": PROTO_VERSION})
        reply = self._recv()
        if reply.get("proto") != PROTO_VERSION:
            raise BridgeError(
                f"protocol version mismatch: remote speaks {reply.get('proto')}")
        if "vocab" not in reply:
            raise BridgeError(f"handshake reply carries no vocab: {reply!r}")
        return Vocabulary(tokens=tuple(reply["vocab"]))

    def next_distribution(self, context):
        self._send({"ctx": list(context)})
        reply = self._recv()
        if "probs" not in reply:
            raise BridgeError(f"step reply carries no probs: {reply!r}")
        probs = np.asarray(reply["probs"], dtype=float)
        if probs.shape != (len(self.vocabulary),):
            raise BridgeError("probability vector length != vocab size")
        if (probs < 0).any():
            raise BridgeError("negative probabilities in step reply")
        total = float(probs.sum())
        if total <= 0:
            raise BridgeError("probability vector sums to zero")
        if abs(total - 1.0) > 1e-9:
            self.renormalized_frames += 1
            probs = probs / total
        return probs


def bridge_connect(endpoint):
    """Connect to ``host:port`` and run the handshake."""
    host, _, port = endpoint.rpartition(":")
    try:
        conn = socket.create_connection((host, int(port)))
    except OSError as exc:
        raise BridgeError(f"cannot reach bridge endpoint {endpoint}") from exc
    return BridgeProvider(conn.makefile("rb"), conn.makefile("wb"))
