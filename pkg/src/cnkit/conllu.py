"""Minimal CoNLL-U reader feeding the syntactic metrics.

Only the ID and HEAD columns are consumed. Multiword ranges (IDs like 1-2)
and empty nodes (IDs like 3.1) are skipped; comment lines are ignored.
"""

from .metrics import ParsedCn


class ConlluError(ValueError):
    pass


def _parse_sentence(lines, start_line):
    heads = {}
    for offset, line in enumerate(lines):
        cols = line.split("\t")
        if len(cols) < 8:
            raise ConlluError(
                f"line {start_line + offset}: expected 10-column CoNLL-U row")
        token_id, head = cols[0], cols[6]
        if "-" in token_id or "." in token_id:
            continue
        try:
            heads[int(token_id)] = int(head)
        except ValueError as exc:
            raise ConlluError(
                f"line {start_line + offset}: non-integer ID/HEAD") from exc
    if not heads:
        return None
    ordered = [heads[i] for i in sorted(heads)]
    if sorted(heads) != list(range(1, len(ordered) + 1)):
        raise ConlluError(f"line {start_line}: token IDs are not dense")
    return tuple(ordered)


def parse_conllu(text: str) -> ParsedCn:
    """Parse CoNLL-U text into a ParsedCn (per-sentence head vectors)."""
    sentences = []
    pending = []
    pending_start = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if pending:
                parsed = _parse_sentence(pending, pending_start)
                if parsed:
                    sentences.append(parsed)
                pending = []
            continue
        if line.startswith("#"):
            continue
        if not pending:
            pending_start = lineno
        pending.append(line)
    if pending:
        parsed = _parse_sentence(pending, pending_start)
        if parsed:
            sentences.append(parsed)
    return ParsedCn(sentences=tuple(sentences))


def load_conllu(path) -> ParsedCn:
    with open(path, encoding="utf-8") as f:
        return parse_conllu(f.read())
