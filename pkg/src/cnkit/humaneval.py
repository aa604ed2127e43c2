"""Human-evaluation protocol: annotation records, blind evaluation batches,
the append-only store, aggregation, and the APE preference tally."""

import json
import random
import threading
import time
from dataclasses import asdict, dataclass, field


class AnnotationError(ValueError):
    pass


class BestConflictError(AnnotationError):
    def __init__(self, conflicting_cn_id):
        super().__init__(
            f"is-best already assigned to {conflicting_cn_id}; retract first")
        self.conflicting_cn_id = conflicting_cn_id


@dataclass(frozen=True)
class AnnotationRecord:
    annotator_id: str
    hs_id: str
    cn_id: str
    sui: int
    spe: int
    grm: int
    cho: int
    best: int
    timestamp: float = 0.0

    def __post_init__(self):
        for name in ("sui", "spe", "grm"):
            value = getattr(self, name)
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise AnnotationError(
                    f"{name} must be an integer in 1..5, got {value!r}")
        for name in ("cho", "best"):
            if getattr(self, name) not in (0, 1):
                raise AnnotationError(f"{name} must be 0 or 1")


@dataclass(frozen=True)
class EvaluationItem:
    """One HS with its blinded candidate CNs in presentation order.

    ``provenance`` (cn_id -> (model, decoding)) never reaches annotators.
    """

    hs_id: str
    hs: str
    candidates: tuple  # of (cn_id, text), already shuffled
    provenance: dict = field(default_factory=dict, hash=False, compare=False)

    def annotator_payload(self):
        return {"hs_id": self.hs_id, "hs": self.hs,
                "candidates": [{"cn_id": cid, "text": text}
                               for cid, text in self.candidates]}


@dataclass(frozen=True)
class ApeComparison:
    """A blind A/B pair; ``ape_first`` records the seeded ordering so
    verdicts can be de-randomized."""

    comparison_id: str
    hs_id: str
    hs: str
    first: str
    second: str
    ape_first: bool

    def annotator_payload(self):
        return {"comparison_id": self.comparison_id, "hs_id": self.hs_id,
                "hs": self.hs, "first": self.first, "second": self.second}


VERDICTS = ("FIRST", "SECOND", "TIE")


@dataclass(frozen=True)
class VerdictRecord:
    annotator_id: str
    comparison_id: str
    verdict: str
    timestamp: float = 0.0

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise AnnotationError(f"verdict must be one of {VERDICTS}")


class AnnotationStore:
    """Append-only log of annotations with a derived current-state view.

    Re-submission supersedes the previous record for the same
    (annotator, item) key, but history stays in the log. When a path is
    given, every accepted record is appended and flushed before the ack.
    """

    def __init__(self, path=None):
        self._path = path
        self._log = []
        self._lock = threading.Lock()
        if path is not None:
            self._replay(path)

    def _replay(self, path):
        try:
            f = open(path, encoding="utf-8")
        except FileNotFoundError:
            return
        with f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError:
                    continue  # torn tail write; the log up to here is valid
                self._log.append(self._decode(obj))

    @staticmethod
    def _decode(obj):
        kind = obj.pop("kind")
        if kind == "annotation":
            return AnnotationRecord(**obj)
        if kind == "verdict":
            return VerdictRecord(**obj)
        raise AnnotationError(f"unknown log record kind {kind!r}")

    def _append(self, record):
        self._log.append(record)
        if self._path is not None:
            kind = ("annotation" if isinstance(record, AnnotationRecord)
                    else "verdict")
            with open(self._path, "a", encoding="utf-8") as f:
                f.write(json.dumps({"kind": kind, **asdict(record)},
                                   ensure_ascii=False) + "\n")
                f.flush()

    @property
    def log(self):
        with self._lock:
            return list(self._log)

    def current_annotations(self):
        """Latest annotation per (annotator, cn) key."""
        view = {}
        for rec in self.log:
            if isinstance(rec, AnnotationRecord):
                view[(rec.annotator_id, rec.cn_id)] = rec
        return view

    def current_verdicts(self):
        view = {}
        for rec in self.log:
            if isinstance(rec, VerdictRecord):
                view[(rec.annotator_id, rec.comparison_id)] = rec
        return view

    def submit_annotation(self, record: AnnotationRecord):
        """Persist an annotation; rejects a second is-best for the same HS."""
        with self._lock:
            if record.best == 1:
                for (annotator, cn_id), current in self._current_unlocked().items():
                    if (annotator == record.annotator_id
                            and current.hs_id == record.hs_id
                            and cn_id != record.cn_id
                            and current.best == 1):
                        raise BestConflictError(cn_id)
            self._append(record)
        return {"status": "ok", "cn_id": record.cn_id}

    def _current_unlocked(self):
        view = {}
        for rec in self._log:
            if isinstance(rec, AnnotationRecord):
                view[(rec.annotator_id, rec.cn_id)] = rec
        return view

    def submit_verdict(self, record: VerdictRecord):
        with self._lock:
            self._append(record)
        return {"status": "ok", "comparison_id": record.comparison_id}


# ---------------------------------------------------------------------------
# batch construction

def build_eval_batch(winners, sample_size=200, seed=0, hs_texts=None):
    """Sample HS items from Best-per-model winners and blind them.

    Each item carries one CN per model, in a seeded shuffled order;
    ``hs_texts`` maps hs_id to the HS text shown to annotators.
    """
    hs_texts = hs_texts or {}
    by_hs = {}
    for w in winners:
        by_hs.setdefault(w.hs_id, []).append(w)
    if len(by_hs) < sample_size:
        raise AnnotationError(
            f"only {len(by_hs)} distinct HS available, need {sample_size}")
    rng = random.Random(f"eval-batch:{seed}")
    chosen = rng.sample(sorted(by_hs), sample_size)
    items = []
    for hs_id in chosen:
        group = sorted(by_hs[hs_id], key=lambda w: w.model_id)
        candidates = []
        provenance = {}
        for i, w in enumerate(group):
            cn_id = f"{hs_id}:cn{i}"
            candidates.append((cn_id, w.text))
            provenance[cn_id] = (w.model_id, w.decoding_id)
        rng.shuffle(candidates)
        items.append(EvaluationItem(hs_id=hs_id, hs=hs_texts.get(hs_id, ""),
                                    candidates=tuple(candidates),
                                    provenance=provenance))
    return items


def build_comparisons(pairs, seed=0):
    """Blind APE comparisons; each (hs_id, hs, cn_or, cn_ape) pair is put in
    seeded random order."""
    rng = random.Random(f"ape-order:{seed}")
    comparisons = []
    for i, (hs_id, hs, cn_or, cn_ape) in enumerate(pairs):
        ape_first = rng.random() < 0.5
        first, second = (cn_ape, cn_or) if ape_first else (cn_or, cn_ape)
        comparisons.append(ApeComparison(
            comparison_id=f"cmp{i}", hs_id=hs_id, hs=hs,
            first=first, second=second, ape_first=ape_first))
    return comparisons


# ---------------------------------------------------------------------------
# aggregation

def aggregate_human(store: AnnotationStore, provenance, grouping="model"):
    """Mean SUI/SPE/GRM and CHO/BEST selection rates per group.

    ``provenance`` maps cn_id -> (model_id, decoding_id); ``grouping`` is
    one of model, decoding, model-decoding.
    """
    def group_of(cn_id):
        model, dec = provenance[cn_id]
        if grouping == "model":
            return model
        if grouping == "decoding":
            return dec
        return f"{model}+{dec}"

    buckets = {}
    for (_, cn_id), rec in sorted(store.current_annotations().items()):
        buckets.setdefault(group_of(cn_id), []).append(rec)
    if not any(buckets.values()):
        raise AnnotationError("no annotations to aggregate")

    table = {}
    for group, records in sorted(buckets.items()):
        n = len(records)
        table[group] = {
            "sui": sum(r.sui for r in records) / n,
            "spe": sum(r.spe for r in records) / n,
            "grm": sum(r.grm for r in records) / n,
            "cho": sum(r.cho for r in records) / n,
            "best": sum(r.best for r in records) / n,
            "n": n,
        }
    return table


def human_table_tsv(table):
    lines = ["group\tSUI\tSPE\tGRM\tCHO\tBEST\tn"]
    for group, row in table.items():
        lines.append("\t".join([
            group, f"{row['sui']:.3f}", f"{row['spe']:.3f}",
            f"{row['grm']:.3f}", f"{row['cho']:.3f}", f"{row['best']:.3f}",
            str(row["n"])]))
    return "\n".join(lines) + "\n"


def ape_preference_tally(store: AnnotationStore, comparisons):
    """Preference percentages (ape, original, tie), averaged over annotators.

    Verdicts are de-randomized through each comparison's recorded ordering.
    Every comparison must have a verdict from every annotator that
    participated.
    """
    by_id = {c.comparison_id: c for c in comparisons}
    verdicts = store.current_verdicts()
    annotators = sorted({a for a, _ in verdicts})
    if not annotators:
        raise AnnotationError("no verdicts recorded")
    missing = [(a, c.comparison_id) for a in annotators
               for c in comparisons if (a, c.comparison_id) not in verdicts]
    if missing:
        raise AnnotationError(f"missing verdicts: {missing}")

    per_annotator = {}
    for annotator in annotators:
        counts = {"ape": 0, "original": 0, "tie": 0}
        for c in comparisons:
            verdict = verdicts[(annotator, c.comparison_id)].verdict
            if verdict == "TIE":
                counts["tie"] += 1
            elif (verdict == "FIRST") == c.ape_first:
                counts["ape"] += 1
            else:
                counts["original"] += 1
        total = len(comparisons)
        per_annotator[annotator] = {k: 100.0 * v / total
                                    for k, v in counts.items()}

    n = len(annotators)
    mean = {k: sum(per_annotator[a][k] for a in annotators) / n
            for k in ("ape", "original", "tie")}
    return {"mean": mean, "per_annotator": per_annotator}


def now():
    return time.time()
