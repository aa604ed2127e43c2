"""Shared fixtures: synthetic datasets shaped for the experiment harness."""

import random

from cnkit.corpus import DatasetRecord, TargetLabel

LOTO_TAGS = ("JEWS", "LGBT+", "MIGRANTS", "MUSLIMS", "WOMEN")

COMMON_WORDS = ("people", "deserve", "respect", "and", "kindness",
                "always", "matter", "everywhere")


def graded_loto_dataset(per_target=10, sentence_len=8, seed=0):
    """A dataset whose targets share vocabulary to a graded degree.

    Target CNs mix a common word pool with target-unique words; the common
    fraction decreases across targets, so cross-target novelty and overlap
    scores spread out instead of clustering.
    """
    rng = random.Random(seed)
    fractions = dict(zip(LOTO_TAGS, (0.95, 0.75, 0.55, 0.35, 0.15)))
    records = []

    def sentence(tag, frac):
        unique = [f"{tag.lower().replace('+', 'x')}{j}" for j in range(8)]
        return " ".join(
            rng.choice(COMMON_WORDS) if rng.random() < frac
            else rng.choice(unique)
            for _ in range(sentence_len))

    i = 0
    for tag in LOTO_TAGS:
        for j in range(per_target):
            records.append(DatasetRecord(
                id=str(i), hs=f"{tag} hs number {j}",
                cn=sentence(tag, fractions[tag]),
                targets=(TargetLabel.parse(tag),)))
            i += 1
    for tag, count in (("DISABLED", 3), ("POC", 3), ("OTHER", 2)):
        for j in range(count):
            records.append(DatasetRecord(
                id=str(i), hs=f"{tag} hs number {j}",
                cn=sentence(tag, 0.5),
                targets=(TargetLabel.parse(tag),)))
            i += 1
    return records


def sistered_loto_dataset(per_target=10, sentence_len=10, seed=0):
    """A dataset where one hub target's vocabulary linearly drives overlap.

    The first target owns a private word pool. Every other target borrows a
    disjoint slice of that pool, to a graded degree, and otherwise stays in
    its own vocabulary. The hub subset is then the influential one for every
    left-out target, and dropping it removes nearly all shared vocabulary.
    """
    rng = random.Random(seed)
    hub, others = LOTO_TAGS[0], LOTO_TAGS[1:]
    fractions = dict(zip(others, (0.8, 0.6, 0.4, 0.2)))
    # cross-pool rates are deliberately non-monotone in the fractions, so the
    # residual (without-influential) novelty decorrelates from overlap
    cross_rates = dict(zip(others, (0.10, 0.02, 0.12, 0.04)))
    function_words = ("the", "and")
    cross_pool = [f"shared{j}" for j in range(6)]
    hub_borrowable = [f"hub{j}" for j in range(24)]
    hub_reserved = [f"hubres{j}" for j in range(12)]
    slices = {tag: hub_borrowable[6 * k:6 * k + 6]
              for k, tag in enumerate(others)}
    own_words = {tag: [f"{tag.lower().replace('+', 'x')}w{j}"
                       for j in range(6)] for tag in LOTO_TAGS}
    records = []
    i = 0
    for tag in LOTO_TAGS:
        for j in range(per_target):
            words = []
            hub_pool = hub_borrowable + hub_reserved
            for _ in range(sentence_len):
                r = rng.random()
                if r < 0.05:
                    words.append(rng.choice(function_words))
                elif tag == hub:
                    words.append(rng.choice(hub_pool))
                elif r < 0.05 + cross_rates[tag]:
                    words.append(rng.choice(cross_pool))
                elif r < 0.05 + cross_rates[tag] + 0.9 * fractions[tag]:
                    words.append(rng.choice(slices[tag]))
                else:
                    words.append(rng.choice(own_words[tag]))
            records.append(DatasetRecord(
                id=str(i), hs=f"{tag} hs number {j}",
                cn=" ".join(words), targets=(TargetLabel.parse(tag),)))
            i += 1
    for tag, count in (("DISABLED", 3), ("POC", 3), ("OTHER", 2)):
        for j in range(count):
            records.append(DatasetRecord(
                id=str(i), hs=f"{tag} hs number {j}",
                cn=f"plain words for {tag.lower()} row {j}",
                targets=(TargetLabel.parse(tag),)))
            i += 1
    return records
