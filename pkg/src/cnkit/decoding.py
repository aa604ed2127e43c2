"""The four decoding mechanisms: beam search, top-k, nucleus, and their
combination, plus seeded candidate-generation sessions."""

import math
import random
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .langmodel import next_distribution
from .textkit import tokenize

# conditioning format for an HS prompt; kept in one place on purpose
PROMPT_TEMPLATE = "HS {hs} CN"


class Method(Enum):
    BS = "bs"
    TOP_K = "topk"
    TOP_P = "topp"
    TOP_PK = "toppk"


@dataclass(frozen=True)
class DecodingConfig:
    method: Method
    k: int = 40
    p: float = 0.92
    beams: int = 5
    repetition_penalty: float = 2.0
    max_len: int = 128
    seed: int = 0
    length_normalization: float = 1.0

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError("p must be in (0, 1]")
        if self.k < 1 or self.beams < 1 or self.max_len < 1:
            raise ValueError("k, beams and max_len must be >= 1")
        if self.repetition_penalty < 1:
            raise ValueError("repetition penalty must be >= 1")


@dataclass(frozen=True)
class GenerationResult:
    tokens: tuple
    log_probability: float
    method: Method
    seed: object = None


def apply_repetition_penalty(dist, history, penalty):
    """Divide the probability of already-seen tokens by ``penalty`` and
    renormalize. Penalty 1 is the identity."""
    if penalty == 1 or not history:
        return dist
    out = np.array(dist, dtype=float)
    idx = np.fromiter(history, dtype=int)
    out[idx] /= penalty
    return out / out.sum()


def _descending_order(dist):
    # stable sort on -p keeps lower token indices first among ties
    return np.argsort(-np.asarray(dist), kind="stable")


def truncate_top_k(dist, k):
    """Zero all mass outside the k most probable tokens and renormalize."""
    dist = np.asarray(dist, dtype=float)
    if k >= len(dist):
        return dist
    order = _descending_order(dist)
    out = np.zeros_like(dist)
    keep = order[:k]
    out[keep] = dist[keep]
    return out / out.sum()


def truncate_top_p(dist, p):
    """Keep the smallest probability-sorted prefix with cumulative mass >= p
    (never fewer than one token) and renormalize."""
    dist = np.asarray(dist, dtype=float)
    order = _descending_order(dist)
    cum = np.cumsum(dist[order])
    cutoff = int(np.searchsorted(cum, p - 1e-12)) + 1
    keep = order[:cutoff]
    out = np.zeros_like(dist)
    out[keep] = dist[keep]
    return out / out.sum()


def truncated_distribution(dist, config):
    """The distribution actually sampled from under the configured method."""
    if config.method is Method.TOP_K:
        return truncate_top_k(dist, config.k)
    if config.method is Method.TOP_P:
        return truncate_top_p(dist, config.p)
    if config.method is Method.TOP_PK:
        return truncate_top_p(truncate_top_k(dist, config.k), config.p)
    raise ValueError(f"{config.method} is not a sampling method")


def sample_from(dist, rng):
    """Inverse-CDF draw, deterministic given the rng state."""
    r = rng.random()
    cum = 0.0
    last_support = None
    for idx, prob in enumerate(dist):
        if prob <= 0:
            continue
        cum += prob
        last_support = idx
        if r < cum:
            return idx
    return last_support  # guard against float round-off at the tail


def sample_step(dist, config, rng):
    """One stochastic decoding step; consumes the rng deterministically."""
    return sample_from(truncated_distribution(dist, config), rng)


def _beam_sort_key(entry):
    tokens, logp = entry
    return (-logp, tokens)


def beam_search(provider, prompt, config, n_best=1):
    """Standard beam search over a provider.

    The repetition penalty is applied per beam against that beam's own
    history (prompt included). Finished beams are retired at EOS; the final
    ranking is log-probability over length**alpha with lexicographic tie
    breaks. Returns the best result, or the n_best top beams as a list when
    ``n_best`` > 1.
    """
    eos = provider.vocabulary.eos
    prompt = tuple(prompt)
    live = [((), 0.0)]
    finished = []
    for _ in range(config.max_len):
        if not live:
            break
        expansions = []
        for tokens, logp in live:
            dist = next_distribution(provider, prompt + tokens)
            dist = apply_repetition_penalty(
                dist, set(prompt + tokens), config.repetition_penalty)
            for idx in np.flatnonzero(dist > 0):
                idx = int(idx)
                expansions.append((tokens + (idx,),
                                   logp + math.log(float(dist[idx]))))
        expansions.sort(key=_beam_sort_key)
        # keep the top `beams` expansions; those ending at EOS retire
        live = []
        for tokens, logp in expansions[:config.beams]:
            if tokens[-1] == eos:
                finished.append((tokens, logp))
            else:
                live.append((tokens, logp))
    # beams that hit max_len without EOS count as finished at max_len
    finished.extend(live)

    alpha = config.length_normalization

    def final_key(entry):
        tokens, logp = entry
        return (-(logp / len(tokens) ** alpha), tokens)

    finished.sort(key=final_key)
    results = [GenerationResult(tokens=t, log_probability=lp, method=Method.BS)
               for t, lp in finished[:max(n_best, 1)]]
    if n_best == 1:
        return results[0]
    return results


def _sample_sequence(provider, prompt, config, rng, seed_tag):
    tokens = []
    logp = 0.0
    eos = provider.vocabulary.eos
    for _ in range(config.max_len):
        context = list(prompt) + tokens
        dist = next_distribution(provider, context)
        dist = apply_repetition_penalty(
            dist, set(context), config.repetition_penalty)
        truncated = truncated_distribution(dist, config)
        idx = sample_from(truncated, rng)
        tokens.append(idx)
        logp += math.log(float(truncated[idx]))
        if idx == eos:
            break
    return GenerationResult(tokens=tuple(tokens), log_probability=logp,
                            method=config.method, seed=seed_tag)


def encode_prompt(vocabulary, hs: str):
    """Token-index prompt for an HS, BOS-framed."""
    tokens = tokenize(PROMPT_TEMPLATE.format(hs=hs))
    return [vocabulary.bos] + vocabulary.encode(list(tokens))


def generate_candidates(provider, hs: str, config, n: int = 5):
    """Generate n candidate CNs for one HS.

    Stochastic methods draw n independently seeded samples (seed plus
    candidate index); beam search returns its top-n finished beams.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prompt = encode_prompt(provider.vocabulary, hs)
    if config.method is Method.BS:
        results = beam_search(provider, prompt, config, n_best=n)
        return results if isinstance(results, list) else [results]
    out = []
    for i in range(n):
        seed_tag = f"{config.seed}:{i}"
        rng = random.Random(seed_tag)
        out.append(_sample_sequence(provider, prompt, config, rng, seed_tag))
    return out


def decode_text(vocabulary, result: GenerationResult) -> str:
    """Render generated token indices back to text, dropping EOS."""
    words = [vocabulary.tokens[i] for i in result.tokens
             if i != vocabulary.eos]
    return " ".join(words)
