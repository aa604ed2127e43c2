"""Command-line entry point wiring the toolkit's pipelines together.

Every command writes a manifest next to its outputs; re-running a command
from its manifest reproduces the outputs byte-for-byte. Exit codes:
0 success, 2 validation failure, 3 unreachable bridge, 4 port in use.
"""

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import experiments, figures
from .corpus import (CorpusError, LotoConfig, SplitSpec, Split, TargetLabel,
                     build_ape_corpus, build_loto, load_dataset, load_triplets,
                     save_dataset)
from .decoding import DecodingConfig, Method, decode_text, generate_candidates
from .humaneval import (AnnotationStore, ApeComparison, EvaluationItem,
                        build_eval_batch)
from .langmodel import BridgeError, bridge_connect, train_ngram
from .manifest import read_manifest, write_manifest
from .metrics import MetricVector, score_candidates
from .selection import (CandidateCell, GroupBy, Winner, corpus_report,
                        report_to_tsv, select_best)
from .textkit import tokenize
from .toxicity import ToxicityClient, ToxicityConfigError


def _fail(message, code=2):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_ratios(text):
    parts = [Fraction(p) for p in text.split(",")]
    total = sum(parts)
    return tuple(p / total for p in parts)


def _write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def _read_jsonl(path):
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


@click.group()
def main():
    """Counter-narrative generation and evaluation toolkit."""


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", default="jsonl",
              type=click.Choice(["jsonl", "csv"]))
@click.option("--ratios", default="8,1,1", show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--tolerance", default=0.02, type=float, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def split(in_path, fmt, ratios, seed, tolerance, out_dir):
    """Partition a dataset into train/val/test."""
    from .corpus import split_dataset
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        spec = SplitSpec(ratios=_parse_ratios(ratios), seed=seed,
                         target_tolerance=tolerance)
        records = load_dataset(in_path, format=fmt)
        assigned = split_dataset(records, spec)
    except CorpusError as exc:
        _fail(f"--in/--ratios: {exc}")
    outputs = []
    for split_value, name in ((Split.TRAIN, "train"), (Split.VAL, "val"),
                              (Split.TEST, "test")):
        path = out / f"{name}.jsonl"
        save_dataset([r for r in assigned if r.split is split_value], path)
        outputs.append(path)
    write_manifest(out / "manifest.json", "split", sys.argv[1:],
                   {"ratios": ratios, "seed": seed, "tolerance": tolerance,
                    "format": fmt, "in": str(in_path)},
                   [in_path], outputs)


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--leave-out", required=True)
@click.option("--quota", default=600, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def loto(in_path, leave_out, quota, seed, out_dir):
    """Build one leave-one-target-out train/test configuration."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        config = LotoConfig(left_out=TargetLabel.parse(leave_out),
                            per_target_quota=quota, seed=seed)
        records = load_dataset(in_path)
        train, test = build_loto(records, config)
    except CorpusError as exc:
        _fail(f"--leave-out/--quota: {exc}")
    save_dataset(train, out / "train.jsonl")
    save_dataset(test, out / "test.jsonl")
    write_manifest(out / "manifest.json", "loto", sys.argv[1:],
                   {"leave_out": leave_out, "quota": quota, "seed": seed,
                    "in": str(in_path)},
                   [in_path], [out / "train.jsonl", out / "test.jsonl"],
                   extra={"train_size": len(train), "test_size": len(test)})


@main.command("ape-prep")
@click.option("--triplets", "triplets_path", required=True,
              type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def ape_prep(triplets_path, seed, out_dir):
    """Build the filtered, partitioned post-editing corpus."""
    from .textkit import ter_text
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        triplets = load_triplets(triplets_path)
        partitions = build_ape_corpus(triplets, ter_text,
                                      SplitSpec(seed=seed))
    except CorpusError as exc:
        _fail(f"--triplets: {exc}")
    outputs = []
    counts = {}
    for split_value, name in ((Split.TRAIN, "train"), (Split.TEST, "test"),
                              (Split.VAL, "val")):
        path = out / f"ape_{name}.jsonl"
        _write_jsonl(path, [{"id": p.id, "hs": p.hs, "source_cn": p.source_cn,
                             "cn_pe": p.cn_pe}
                            for p in partitions[split_value]])
        outputs.append(path)
        counts[name] = len(partitions[split_value])
    write_manifest(out / "manifest.json", "ape-prep", sys.argv[1:],
                   {"seed": seed, "triplets": str(triplets_path)},
                   [triplets_path], outputs, extra={"counts": counts})


def _provider_from_spec(spec, order):
    if spec.startswith("ngram:"):
        corpus_path = spec.split(":", 1)[1]
        records = load_dataset(corpus_path)
        seqs = [tokenize(f"HS {r.hs} CN {r.cn}") for r in records]
        return train_ngram(seqs, order=order), [corpus_path]
    if spec.startswith("bridge:"):
        endpoint = spec.split(":", 1)[1]
        try:
            return bridge_connect(endpoint), []
        except BridgeError as exc:
            _fail(str(exc), code=3)
    _fail(f"--model must be ngram:<path> or bridge:<endpoint>, got {spec}")


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--model", "model_spec", required=True)
@click.option("--model-id", default=None)
@click.option("--method", default="topk",
              type=click.Choice([m.value for m in Method]))
@click.option("--k", default=40, type=int, show_default=True)
@click.option("--p", default=0.92, type=float, show_default=True)
@click.option("--beams", default=5, type=int, show_default=True)
@click.option("--rep-penalty", default=2.0, type=float, show_default=True)
@click.option("--max-len", default=128, type=int, show_default=True)
@click.option("--order", default=3, type=int, show_default=True,
              help="n-gram order for ngram: models")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--n", default=5, type=int, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def generate(in_path, model_spec, model_id, method, k, p, beams, rep_penalty,
             max_len, order, seed, n, out_path):
    """Generate candidate CNs for every HS in a dataset file."""
    try:
        config = DecodingConfig(method=Method(method), k=k, p=p, beams=beams,
                                repetition_penalty=rep_penalty,
                                max_len=max_len, seed=seed)
        records = load_dataset(in_path)
    except (CorpusError, ValueError) as exc:
        _fail(str(exc))
    provider, extra_inputs = _provider_from_spec(model_spec, order)
    model_id = model_id or model_spec.split(":", 1)[0]
    rows = []
    for rec in records:
        results = generate_candidates(provider, rec.hs, config, n=n)
        rows.append({
            "hs_id": rec.id,
            "model_id": model_id,
            "decoding_id": method,
            "candidates": [decode_text(provider.vocabulary, r)
                           for r in results],
        })
    _write_jsonl(out_path, rows)
    write_manifest(Path(out_path).with_suffix(".manifest.json"), "generate",
                   sys.argv[1:],
                   {"model": model_spec, "method": method, "k": k, "p": p,
                    "beams": beams, "repetition_penalty": rep_penalty,
                    "max_len": max_len, "order": order, "seed": seed, "n": n,
                    "in": str(in_path)},
                   [in_path, *extra_inputs], [out_path])


@main.command()
@click.option("--candidates", "cand_path", required=True,
              type=click.Path(exists=True))
@click.option("--references", "ref_path", required=True,
              type=click.Path(exists=True))
@click.option("--toxicity", is_flag=True, default=False)
@click.option("--toxicity-endpoint", default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
def evaluate(cand_path, ref_path, toxicity, toxicity_endpoint, out_path):
    """Score candidate files against gold references."""
    try:
        references = {r.id: r.cn for r in load_dataset(ref_path)}
    except CorpusError as exc:
        _fail(f"--references: {exc}")
    rows = _read_jsonl(cand_path)
    missing = sorted({row["hs_id"] for row in rows
                      if row["hs_id"] not in references})
    if missing:
        _fail(f"no reference for hs ids: {', '.join(missing)}")
    client = None
    if toxicity:
        try:
            client = ToxicityClient(endpoint=toxicity_endpoint)
        except ToxicityConfigError as exc:
            _fail(str(exc))
    out_rows = []
    for row in rows:
        vectors = score_candidates(row["candidates"], references[row["hs_id"]])
        scored = [{"text": text, **vec.as_dict()}
                  for text, vec in zip(row["candidates"], vectors)]
        if client is not None:
            for entry in scored:
                entry["toxicity"] = client.score(entry["text"])
        out_rows.append({**row, "candidates": scored})
    _write_jsonl(out_path, out_rows)
    write_manifest(Path(out_path).with_suffix(".manifest.json"), "evaluate",
                   sys.argv[1:],
                   {"candidates": str(cand_path), "references": str(ref_path),
                    "toxicity": toxicity},
                   [cand_path, ref_path], [out_path])


def _cells_from_metric_rows(rows):
    cells = []
    for row in rows:
        candidates = tuple(
            (c["text"], MetricVector(rouge_l=c["rouge_l"], bleu1=c["bleu1"],
                                     bleu3=c["bleu3"], bleu4=c["bleu4"]))
            for c in row["candidates"])
        cells.append(CandidateCell(hs_id=row["hs_id"],
                                   model_id=row["model_id"],
                                   decoding_id=row["decoding_id"],
                                   candidates=candidates))
    return cells


@main.command()
@click.option("--metrics", "metrics_path", required=True,
              type=click.Path(exists=True))
@click.option("--group", default="model",
              type=click.Choice([g.value for g in GroupBy]))
@click.option("--out", "out_path", required=True, type=click.Path())
def select(metrics_path, group, out_path):
    """Pick the best CN per HS and group by mean overlap rank."""
    cells = _cells_from_metric_rows(_read_jsonl(metrics_path))
    try:
        winners = select_best(cells, GroupBy(group))
    except ValueError as exc:
        _fail(str(exc))
    _write_jsonl(out_path, [{
        "hs_id": w.hs_id, "group": w.group, "model_id": w.model_id,
        "decoding_id": w.decoding_id, "text": w.text,
        "mean_rank": w.mean_rank, **w.metrics.as_dict()}
        for w in winners])
    write_manifest(Path(out_path).with_suffix(".manifest.json"), "select",
                   sys.argv[1:],
                   {"metrics": str(metrics_path), "group": group},
                   [metrics_path], [out_path])


def _winners_from_rows(rows):
    return [Winner(hs_id=r["hs_id"], group=r["group"],
                   model_id=r["model_id"], decoding_id=r["decoding_id"],
                   text=r["text"], mean_rank=r["mean_rank"],
                   metrics=MetricVector(rouge_l=r["rouge_l"],
                                        bleu1=r["bleu1"], bleu3=r["bleu3"],
                                        bleu4=r["bleu4"]))
            for r in rows]


@main.command()
@click.option("--winners", "winners_path", required=True,
              type=click.Path(exists=True))
@click.option("--training", "training_path", required=True,
              type=click.Path(exists=True))
@click.option("--rr-window", default=1000, type=int, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def report(winners_path, training_path, rr_window, out_dir):
    """Corpus-level tables and figures over selected winners."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    winners = _winners_from_rows(_read_jsonl(winners_path))
    try:
        training = [r.cn for r in load_dataset(training_path)]
        rows = corpus_report(winners, training, window=rr_window)
    except (CorpusError, ValueError) as exc:
        _fail(str(exc))
    table_path = out / "report.tsv"
    table_path.write_text(report_to_tsv(rows), encoding="utf-8")
    figures.overlap_bars(rows, out / "overlap.png")
    figures.diversity_scatter(rows, out / "diversity.png")
    write_manifest(out / "manifest.json", "report", sys.argv[1:],
                   {"winners": str(winners_path),
                    "training": str(training_path), "rr_window": rr_window},
                   [winners_path, training_path],
                   [table_path, out / "overlap.png", out / "diversity.png"])


@main.command("loto-run")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--quota", default=600, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--n", default=5, type=int, show_default=True)
@click.option("--max-len", default=64, type=int, show_default=True)
@click.option("--order", default=3, type=int, show_default=True)
@click.option("--rr-window", default=1000, type=int, show_default=True)
@click.option("--targets", default=None,
              help="comma-separated LOTO targets; default: the five largest")
@click.option("--out-dir", required=True, type=click.Path())
def loto_run_cmd(in_path, quota, seed, n, max_len, order, rr_window, targets,
                 out_dir):
    """Full LOTO experiment with the built-in n-gram provider."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        records = load_dataset(in_path)
        target_list = ([TargetLabel.parse(t) for t in targets.split(",")]
                       if targets else None)
        report_obj = experiments.loto_run(
            records,
            provider_factory=experiments.default_provider_factory(order=order),
            configs=experiments.default_decoding_configs(seed=seed,
                                                         max_len=max_len),
            targets=target_list, quota=quota, seed=seed, n=n,
            rr_window=rr_window)
    except (CorpusError, ValueError) as exc:
        _fail(str(exc))
    outputs = []
    for label, results in report_obj.per_decoding.items():
        path = out / f"loto_{label}.tsv"
        path.write_text(experiments.loto_table_tsv(results), encoding="utf-8")
        outputs.append(path)
        rr_path = out / f"rr_comparison_{label}.tsv"
        rr_path.write_text(experiments.rr_comparison_tsv(results),
                           encoding="utf-8")
        outputs.append(rr_path)
    influence_path = out / "influence.tsv"
    influence_path.write_text(
        experiments.influence_table_tsv(report_obj.influence),
        encoding="utf-8")
    outputs.append(influence_path)
    corr = report_obj.correlations
    corr_path = out / "correlations.json"
    corr_path.write_text(json.dumps({
        "overlap_with_influential": corr.overlap_with_influential,
        "overlap_without_influential": corr.overlap_without_influential,
        "candidate_reference_novelty": corr.candidate_reference_novelty,
    }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    outputs.append(corr_path)
    for metric in ("rouge_l", "bleu1", "bleu3", "bleu4"):
        with_series, without_series = experiments.correlation_scatter_points(
            report_obj, metric)
        csv_path = out / f"scatter_{metric}.csv"
        with open(csv_path, "w", encoding="utf-8") as f:
            f.write("series,x,y\n")
            for x, y in with_series:
                f.write(f"with_influential,{x:.6f},{y:.6f}\n")
            for x, y in without_series:
                f.write(f"without_influential,{x:.6f},{y:.6f}\n")
        outputs.append(csv_path)
        fig_path = out / f"scatter_{metric}.png"
        figures.correlation_scatter(with_series, without_series, metric,
                                    fig_path)
        outputs.append(fig_path)
    write_manifest(out / "manifest.json", "loto-run", sys.argv[1:],
                   {"in": str(in_path), "quota": quota, "seed": seed, "n": n,
                    "max_len": max_len, "order": order,
                    "rr_window": rr_window, "targets": targets},
                   [in_path], outputs)


@main.command("eval-batch")
@click.option("--winners", "winners_path", required=True,
              type=click.Path(exists=True))
@click.option("--references", "ref_path", required=True,
              type=click.Path(exists=True))
@click.option("--size", default=200, type=int, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_batch(winners_path, ref_path, size, seed, out_path):
    """Build a blinded human-evaluation batch from winner files."""
    winners = _winners_from_rows(_read_jsonl(winners_path))
    try:
        hs_texts = {r.id: r.hs for r in load_dataset(ref_path)}
        items = build_eval_batch(winners, sample_size=size, seed=seed,
                                 hs_texts=hs_texts)
    except (CorpusError, ValueError) as exc:
        _fail(str(exc))
    _write_jsonl(out_path, [{
        "hs_id": item.hs_id, "hs": item.hs,
        "candidates": [[cid, text] for cid, text in item.candidates],
        "provenance": {cid: list(p) for cid, p in item.provenance.items()},
    } for item in items])
    write_manifest(Path(out_path).with_suffix(".manifest.json"), "eval-batch",
                   sys.argv[1:],
                   {"winners": str(winners_path), "references": str(ref_path),
                    "size": size, "seed": seed},
                   [winners_path, ref_path], [out_path])


def load_batch_file(path):
    items = []
    for row in _read_jsonl(path):
        items.append(EvaluationItem(
            hs_id=row["hs_id"], hs=row.get("hs", ""),
            candidates=tuple((c[0], c[1]) for c in row["candidates"]),
            provenance={k: tuple(v)
                        for k, v in row.get("provenance", {}).items()}))
    return items


def load_comparisons_file(path):
    return [ApeComparison(comparison_id=row["comparison_id"],
                          hs_id=row["hs_id"], hs=row.get("hs", ""),
                          first=row["first"], second=row["second"],
                          ape_first=row["ape_first"])
            for row in _read_jsonl(path)]


@main.command("annotate-serve")
@click.option("--batch", "batch_path", required=True,
              type=click.Path(exists=True))
@click.option("--comparisons", "comparisons_path", default=None,
              type=click.Path(exists=True))
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--bind", default="127.0.0.1:8741", show_default=True)
@click.option("--token", "tokens", multiple=True,
              help="token=annotator_id, repeatable")
def annotate_serve(batch_path, comparisons_path, store_path, bind, tokens):
    """Run the annotation service."""
    import uvicorn

    from .service import create_app
    token_map = {}
    for entry in tokens:
        if "=" not in entry:
            _fail(f"--token must be token=annotator_id, got {entry}")
        token, annotator = entry.split("=", 1)
        token_map[token] = annotator
    items = load_batch_file(batch_path)
    comparisons = (load_comparisons_file(comparisons_path)
                   if comparisons_path else [])
    store = AnnotationStore(path=store_path)
    app = create_app(store, items, token_map, comparisons)
    host, _, port = bind.rpartition(":")
    import socket
    probe = socket.socket()
    try:
        probe.bind((host, int(port)))
    except OSError as exc:
        _fail(f"cannot bind {bind}: {exc}", code=4)
    finally:
        probe.close()
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


@main.command()
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
def rerun(manifest_path):
    """Re-run a command from its manifest."""
    manifest = read_manifest(manifest_path)
    # restore the recorded argv so the refreshed manifest is byte-identical
    sys.argv = [sys.argv[0]] + list(manifest["argv"])
    main.main(args=manifest["argv"], standalone_mode=False)


if __name__ == "__main__":
    main()
