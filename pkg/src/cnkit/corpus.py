"""Dataset handling: loading, validated splits, LOTO sets, and APE pairs."""

import csv
import hashlib
import json
import random
import unicodedata
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction


class CorpusError(ValueError):
    pass


class TargetLabel(Enum):
    DISABLED = "DISABLED"
    JEWS = "JEWS"
    LGBT_PLUS = "LGBT+"
    MIGRANTS = "MIGRANTS"
    MUSLIMS = "MUSLIMS"
    POC = "POC"
    WOMEN = "WOMEN"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, value: str) -> "TargetLabel":
        for label in cls:
            if label.value == value:
                return label
        raise CorpusError(f"unknown target label: {value!r}")


class Split(Enum):
    TRAIN = "TRAIN"
    VAL = "VAL"
    TEST = "TEST"


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    hs: str
    cn: str
    targets: tuple
    split: Split | None = None

    def __post_init__(self):
        if not self.hs.strip():
            raise CorpusError(f"record {self.id}: empty hs")
        if not self.cn.strip():
            raise CorpusError(f"record {self.id}: empty cn")
        if not self.targets:
            raise CorpusError(f"record {self.id}: empty target list")
        if len(set(self.targets)) != len(self.targets):
            raise CorpusError(f"record {self.id}: duplicate targets")


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple = (Fraction(8, 10), Fraction(1, 10), Fraction(1, 10))
    seed: int = 0
    target_tolerance: float = 0.02

    def __post_init__(self):
        if any(r < 0 for r in self.ratios) or len(self.ratios) != 3:
            raise CorpusError("SplitSpec needs three non-negative ratios")
        if abs(float(sum(self.ratios)) - 1.0) > 1e-9:
            raise CorpusError("split ratios must sum to 1")


@dataclass(frozen=True)
class ApeTriplet:
    id: str
    hs: str
    cn_or: str
    cn_pe: str
    cn_pe_star: str | None = None

    def __post_init__(self):
        for name in ("hs", "cn_or", "cn_pe"):
            if not getattr(self, name).strip():
                raise CorpusError(f"triplet {self.id}: empty {name}")


@dataclass(frozen=True)
class ApePair:
    """One post-editing training pair: rewrite source_cn into cn_pe."""

    id: str
    hs: str
    source_cn: str
    cn_pe: str


DEFAULT_ALWAYS_IN_TRAIN = frozenset({TargetLabel.POC, TargetLabel.DISABLED})


def loto_targets(always_in_train=DEFAULT_ALWAYS_IN_TRAIN):
    """Targets eligible for leave-one-out: everything but OTHER and the
    always-in-train labels."""
    return [t for t in TargetLabel
            if t is not TargetLabel.OTHER and t not in always_in_train]


@dataclass(frozen=True)
class LotoConfig:
    left_out: TargetLabel
    per_target_quota: int = 600
    always_in_train: frozenset = DEFAULT_ALWAYS_IN_TRAIN
    seed: int = 0

    def __post_init__(self):
        if self.left_out in self.always_in_train:
            raise CorpusError("left_out target cannot be always-in-train")
        if self.left_out not in loto_targets(self.always_in_train):
            raise CorpusError(
                f"{self.left_out.value} is not a valid LOTO target")


# ---------------------------------------------------------------------------
# loading

def _record_from_mapping(obj, lineno):
    try:
        targets = tuple(TargetLabel.parse(t) for t in obj["targets"])
        split = Split(obj["split"]) if obj.get("split") else None
        return DatasetRecord(id=str(obj["id"]), hs=obj["hs"], cn=obj["cn"],
                             targets=targets, split=split)
    except KeyError as exc:
        raise CorpusError(f"line {lineno}: missing field {exc}") from exc
    except CorpusError as exc:
        raise CorpusError(f"line {lineno}: {exc}") from exc


def load_dataset(path, format="jsonl"):
    """Load records from JSON Lines or CSV; errors carry line numbers."""
    records = []
    if format == "jsonl":
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusError(f"line {lineno}: invalid JSON") from exc
                records.append(_record_from_mapping(obj, lineno))
    elif format == "csv":
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            expected = ["id", "hs", "cn", "targets", "split"]
            if reader.fieldnames != expected:
                raise CorpusError(
                    f"CSV header must be {','.join(expected)}")
            for lineno, row in enumerate(reader, start=2):
                obj = dict(row)
                obj["targets"] = [t for t in (obj["targets"] or "").split(",") if t]
                records.append(_record_from_mapping(obj, lineno))
    else:
        raise CorpusError(f"unknown dataset format: {format}")
    seen = set()
    for rec in records:
        if rec.id in seen:
            raise CorpusError(f"duplicate record id: {rec.id}")
        seen.add(rec.id)
    return records


def save_dataset(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            obj = {"id": rec.id, "hs": rec.hs, "cn": rec.cn,
                   "targets": [t.value for t in rec.targets]}
            if rec.split:
                obj["split"] = rec.split.value
            f.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def load_triplets(path):
    triplets = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                triplets.append(ApeTriplet(
                    id=str(obj["id"]), hs=obj["hs"], cn_or=obj["cn_or"],
                    cn_pe=obj["cn_pe"], cn_pe_star=obj.get("cn_pe_star")))
            except (json.JSONDecodeError, KeyError) as exc:
                raise CorpusError(f"line {lineno}: bad triplet row") from exc
            except CorpusError as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
    seen = set()
    for t in triplets:
        if t.id in seen:
            raise CorpusError(f"duplicate triplet id: {t.id}")
        seen.add(t.id)
    return triplets


# ---------------------------------------------------------------------------
# splitting

def normalize_hs(text: str) -> str:
    """HS identity for the no-repetition constraint: NFC, no case folding."""
    return unicodedata.normalize("NFC", text)


def _capacities(total, ratios):
    """Largest-remainder apportionment of ``total`` over ``ratios``."""
    exact = [float(total * r) for r in ratios]
    floors = [int(e) for e in exact]
    short = total - sum(floors)
    order = sorted(range(len(ratios)),
                   key=lambda i: (floors[i] - exact[i], i))
    for i in order[:short]:
        floors[i] += 1
    return floors


def _stable_key(seed, text):
    return hashlib.sha256(f"{seed}:{text}".encode("utf-8")).hexdigest()


def split_dataset(records, spec: SplitSpec):
    """Assign TRAIN/VAL/TEST so that identical HS texts stay together and
    each split keeps the global target distribution.

    Records are grouped by normalized HS, stratified by primary target, and
    the groups are packed largest-first toward per-split quotas. The
    assignment is deterministic given the seed.
    """
    if any(r.split is not None for r in records):
        raise CorpusError("records already carry split assignments")
    groups = {}
    for rec in records:
        groups.setdefault(normalize_hs(rec.hs), []).append(rec)

    total = len(records)
    capacities = _capacities(total, spec.ratios)

    strata = {}
    for hs, members in groups.items():
        primary = members[0].targets[0]
        strata.setdefault(primary, []).append((hs, members))

    assigned = {i: 0 for i in range(3)}
    assignment = {}
    for target in TargetLabel:
        if target not in strata:
            continue
        stratum = strata[target]
        stratum_total = sum(len(m) for _, m in stratum)
        stratum_assigned = [0, 0, 0]
        ordered = sorted(
            stratum, key=lambda g: (-len(g[1]), _stable_key(spec.seed, g[0])))
        for hs, members in ordered:
            size = len(members)
            feasible = [i for i in range(3)
                        if assigned[i] + size <= capacities[i]]
            if not feasible:
                raise CorpusError(
                    f"HS group of size {size} (hs={hs[:40]!r}...) does not "
                    f"fit any split")
            best = min(feasible, key=lambda i: (
                (stratum_assigned[i] + size) / stratum_total
                - float(spec.ratios[i]),
                -(capacities[i] - assigned[i]),
                i))
            assignment[hs] = best
            assigned[best] += size
            stratum_assigned[best] += size

    _refine_assignment(groups, assignment, assigned, spec)

    splits = [Split.TRAIN, Split.VAL, Split.TEST]
    return [replace(rec, split=splits[assignment[normalize_hs(rec.hs)]])
            for rec in records]


def _refine_assignment(groups, assignment, assigned, spec):
    """Equal-size group swaps that shrink the worst per-target share
    deviation left behind by the greedy packing. Split sizes never change."""
    info = sorted(
        ((hs, len(members), members[0].targets[0])
         for hs, members in groups.items()),
        key=lambda g: _stable_key(spec.seed, g[0]))
    total = sum(size for _, size, _ in info)
    target_totals = {}
    for _, size, target in info:
        target_totals[target] = target_totals.get(target, 0) + size
    counts = {}
    for hs, size, target in info:
        key = (assignment[hs], target)
        counts[key] = counts.get(key, 0) + size

    def deviation(split, target):
        share = counts.get((split, target), 0) / assigned[split]
        return abs(share - target_totals[target] / total)

    def worst():
        return max(deviation(i, t) for i in range(3) if assigned[i]
                   for t in target_totals)

    def try_swap(a, b, best):
        a_hs, a_size, a_target = a
        b_hs, b_size, b_target = b
        sa, sb = assignment[a_hs], assignment[b_hs]
        moves = (((sa, a_target), -a_size), ((sb, a_target), a_size),
                 ((sb, b_target), -b_size), ((sa, b_target), b_size))
        for key, delta in moves:
            counts[key] = counts.get(key, 0) + delta
        if worst() < best - 1e-12:
            assignment[a_hs], assignment[b_hs] = sb, sa
            return True
        for key, delta in moves:
            counts[key] -= delta
        return False

    for _ in range(2 * len(info)):
        best = worst()
        if best <= spec.target_tolerance / 2:
            break
        cells = [(i, t) for i in range(3) if assigned[i]
                 for t in target_totals]
        ws, wt = max(cells, key=lambda c: deviation(*c))
        over = (counts.get((ws, wt), 0) / assigned[ws]
                > target_totals[wt] / total)
        # swap a worst-target group out of (or into) the worst split against
        # an equal-size group of some other target
        if over:
            outgoing = [g for g in info
                        if g[2] is wt and assignment[g[0]] == ws]
            incoming = [g for g in info
                        if g[2] is not wt and assignment[g[0]] != ws]
        else:
            outgoing = [g for g in info
                        if g[2] is wt and assignment[g[0]] != ws]
            incoming = [g for g in info
                        if g[2] is not wt and assignment[g[0]] == ws]
        improved = False
        for a in outgoing:
            for b in incoming:
                if a[1] == b[1] and try_swap(a, b, best):
                    improved = True
                    break
            if improved:
                break
        if not improved:
            break


def check_split(records, spec: SplitSpec):
    """Post-hoc verification of the split contract; raises on violation."""
    by_split = {s: [r for r in records if r.split is s] for s in Split}
    capacities = _capacities(len(records), spec.ratios)
    for cap, s in zip(capacities, Split):
        if abs(len(by_split[s]) - cap) > 1:
            raise CorpusError(f"{s.value} size {len(by_split[s])} != {cap}")
    seen = {}
    for rec in records:
        hs = normalize_hs(rec.hs)
        if hs in seen and seen[hs] is not rec.split:
            raise CorpusError(f"HS repeated across splits: {hs[:40]!r}")
        seen[hs] = rec.split


# ---------------------------------------------------------------------------
# LOTO

def _seeded_sample(pool, k, rng):
    ordered = sorted(pool, key=lambda r: r.id)
    return rng.sample(ordered, k)


def build_loto(records, config: LotoConfig):
    """Build one leave-one-target-out configuration.

    The test set holds ``per_target_quota`` records of the left-out target.
    The train set holds a quota sample per remaining LOTO target, every
    record of the always-in-train targets, and single-target OTHER records;
    nothing in train carries the left-out label.
    """
    rng = random.Random(config.seed)
    quota = config.per_target_quota
    left_out = config.left_out

    test_pool = [r for r in records if left_out in r.targets]
    if len(test_pool) < quota:
        raise CorpusError(
            f"target {left_out.value}: only {len(test_pool)} records, "
            f"quota is {quota} (short by {quota - len(test_pool)})")
    test = _seeded_sample(test_pool, quota, rng)

    chosen = {r.id for r in test}
    train = []
    for target in loto_targets(config.always_in_train):
        if target is left_out:
            continue
        pool = [r for r in records
                if target in r.targets and left_out not in r.targets
                and r.id not in chosen]
        if len(pool) < quota:
            raise CorpusError(
                f"target {target.value}: only {len(pool)} eligible records, "
                f"quota is {quota} (short by {quota - len(pool)})")
        sample = _seeded_sample(pool, quota, rng)
        train.extend(sample)
        chosen.update(r.id for r in sample)

    for rec in records:
        if rec.id in chosen or left_out in rec.targets:
            continue
        if any(t in config.always_in_train for t in rec.targets):
            train.append(rec)
            chosen.add(rec.id)
        elif rec.targets == (TargetLabel.OTHER,):
            train.append(rec)
            chosen.add(rec.id)

    return train, test


# ---------------------------------------------------------------------------
# APE corpus

def build_ape_corpus(triplets, ter_fn, spec: SplitSpec | None = None):
    """Training pairs for the post-editing stage, partitioned by HS.

    Each triplet contributes a pair per distinct source version (cn_or, and
    cn_pe_star when present) whose TER against cn_pe is positive. Pairs are
    partitioned with the same split machinery as the main dataset, keyed on
    the HS text.
    """
    spec = spec or SplitSpec()
    pairs = []
    for t in triplets:
        sources = [("or", t.cn_or)]
        if t.cn_pe_star is not None and t.cn_pe_star.strip():
            sources.append(("pe_star", t.cn_pe_star))
        for tag, source in sources:
            if ter_fn(source, t.cn_pe) > 0:
                pairs.append(ApePair(id=f"{t.id}:{tag}", hs=t.hs,
                                     source_cn=source, cn_pe=t.cn_pe))

    proxies = [DatasetRecord(id=p.id, hs=p.hs, cn=p.cn_pe,
                             targets=(TargetLabel.OTHER,)) for p in pairs]
    assigned = split_dataset(proxies, spec)
    by_split = {s: [] for s in Split}
    pair_by_id = {p.id: p for p in pairs}
    for proxy in assigned:
        by_split[proxy.split].append(pair_by_id[proxy.id])
    return by_split
