"""Command-line front end: training, segmentation, QA, icons, evaluation."""

import json
import sys
from pathlib import Path

import click

from ..corpus_io import (
    load_annotations,
    load_corpus_texts,
    load_policies,
    load_qa_dataset,
    split_dataset,
    union_expert_labels,
)
from ..embeddings import load_model, save_model, train_skipgram
from ..errors import AmbiguousQuestionError, PrivacyLensError
from ..hierarchy import TrainingConfig, save_hierarchy, train_hierarchy
from ..icons import STRATEGIES, comparison_table
from ..neuralnet import save_classifier
from ..qa import build_bm25_index, train_semvec_model
from ..segmenter import SegmenterConfig, segment_policy
from ..taxonomy import load_default_taxonomy, load_taxonomy
from .engine import Engine, EngineConfig
from .evaluation import evaluate_qa, icon_vs_expert, qa_report_tables

__all__ = ["main"]


def _fail(exc, code="bad_input"):
    record = {"code": code, "message": str(exc)}
    click.echo(json.dumps(record), err=True)
    sys.exit(1)


def _emit(data, out):
    text = json.dumps(data, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        click.echo(text)


def _load_taxonomy_opt(path):
    return load_taxonomy(path) if path else load_default_taxonomy()


@click.group()
def main():
    """Privacy-policy analysis engine."""


@main.command("train-embeddings")
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--dim", default=300, show_default=True)
@click.option("--window", default=5, show_default=True)
@click.option("--negatives", default=5, show_default=True)
@click.option("--epochs", default=5, show_default=True)
@click.option("--learning-rate", default=0.05, show_default=True)
@click.option("--bucket-count", default=50_000, show_default=True)
@click.option("--min-count", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def train_embeddings_cmd(corpus, out, dim, window, negatives, epochs, learning_rate,
                         bucket_count, min_count, seed):
    """Train subword embeddings on a newline-delimited text corpus."""
    try:
        docs = load_corpus_texts(corpus)
        model, history = train_skipgram(
            docs,
            dim=dim,
            window=window,
            negatives=negatives,
            epochs=epochs,
            learning_rate=learning_rate,
            bucket_count=bucket_count,
            min_count=min_count,
            seed=seed,
        )
        save_model(model, out)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(json.dumps({"vocab": len(model.vocab), "loss_history": history}))


@main.command("train-classifiers")
@click.option("--annotations", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--taxonomy", type=click.Path(exists=True))
@click.option("--train-count", type=int, help="Policies in the training split (default: all).")
@click.option("--epochs", default=10, show_default=True)
@click.option("--batch-size", default=40, show_default=True)
@click.option("--learning-rate", default=1e-3, show_default=True)
@click.option("--max-len", default=300, show_default=True)
@click.option("--filter-count", default=200, show_default=True)
@click.option("--dense-size", default=100, show_default=True)
@click.option("--min-value-annotations", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--with-semvec/--no-semvec", default=True, show_default=True)
def train_classifiers_cmd(annotations, embeddings, out, taxonomy, train_count, epochs,
                          batch_size, learning_rate, max_len, filter_count, dense_size,
                          min_value_annotations, seed, with_semvec):
    """Train the classifier hierarchy (and the distance-baseline model)."""
    try:
        tax = _load_taxonomy_opt(taxonomy)
        emb = load_model(embeddings)
        records = load_annotations(annotations, tax)
        n_policies = len({r.policy_id for r in records})
        split = split_dataset(records, train_count or n_policies, seed=seed)
        cfg = TrainingConfig(
            epochs=epochs,
            batch_size=batch_size,
            learning_rate=learning_rate,
            max_len=max_len,
            filter_count=filter_count,
            dense_size=dense_size,
            min_value_annotations=min_value_annotations,
            seed=seed,
        )
        merged = union_expert_labels(records)
        hierarchy, report = train_hierarchy(tax, emb, merged, split, cfg)
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "taxonomy.json").write_text(tax.to_json())
        save_model(emb, out_dir / "embeddings.bin")
        save_hierarchy(hierarchy, out_dir / "classifiers")
        if with_semvec:
            semvec = train_semvec_model(tax, emb, merged, split, cfg)
            save_classifier(semvec, out_dir / "semvec.bin")
        summary = {
            name: {"macro_f1": entry["macro"]["f1"], "top1": entry["top1_precision"]}
            for name, entry in report.items()
        }
        _emit({"model_dir": str(out_dir), "metrics": summary}, None)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)


@main.command("segment")
@click.option("--policy", required=True, type=click.Path(exists=True))
@click.option("--embeddings", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path())
@click.option("--fine-threshold", default=0.25, show_default=True)
@click.option("--min-sentences", default=2, show_default=True)
@click.option("--short-item-max-words", default=20, show_default=True)
def segment_cmd(policy, embeddings, out, fine_threshold, min_sentences, short_item_max_words):
    """Segment one policy file into JSON-lines segments."""
    try:
        from ..corpus_io import PolicyDocument

        path = Path(policy)
        emb = load_model(embeddings)
        doc = PolicyDocument(policy_id=path.stem, source=path.read_text(encoding="utf-8"))
        cfg = SegmenterConfig(
            fine_threshold=fine_threshold,
            fine_min_sentences=min_sentences,
            short_item_max_words=short_item_max_words,
        )
        segments = segment_policy(doc, emb, cfg)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)
    lines = "\n".join(
        json.dumps({"policy_id": s.policy_id, "segment_index": s.index, "text": s.text,
                    "origin": s.origin})
        for s in segments
    )
    if out:
        Path(out).write_text(lines + "\n")
    else:
        click.echo(lines)


def _engine(model_dir):
    return Engine.load(model_dir, EngineConfig.load())


@main.command("classify")
@click.option("--policy", required=True, type=click.Path(exists=True))
@click.option("--model-dir", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path())
def classify_cmd(policy, model_dir, out):
    """Segment + annotate one policy; emits per-segment present labels."""
    try:
        engine = _engine(model_dir)
        path = Path(policy)
        engine.ingest(path.stem, path.read_text(encoding="utf-8"))
        _emit(engine.labels(path.stem), out)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)


@main.command("ask")
@click.option("--policy", required=True, type=click.Path(exists=True))
@click.option("--model-dir", required=True, type=click.Path(exists=True))
@click.option("--question", required=True)
@click.option("--out", type=click.Path())
def ask_cmd(policy, model_dir, question, out):
    """Answer a free-form question with the top-ranked policy segments."""
    try:
        engine = _engine(model_dir)
        path = Path(policy)
        engine.ingest(path.stem, path.read_text(encoding="utf-8"))
        result = engine.ask(path.stem, question)
    except AmbiguousQuestionError as exc:
        _fail(exc, code="ambiguous_question")
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)
    _emit(
        {
            "question": question,
            "answers": [a.to_dict() for a in result.answers],
            "cer_q": result.cer_q,
            "frac_q": result.frac_q,
            "possibly_unanswerable": result.possibly_unanswerable,
            "notices": list(result.notices),
        },
        out,
    )


@main.command("icons")
@click.option("--policy", required=True, type=click.Path(exists=True))
@click.option("--model-dir", required=True, type=click.Path(exists=True))
@click.option("--strategy", default="conservative", type=click.Choice(STRATEGIES),
              show_default=True)
@click.option("--out", type=click.Path())
def icons_cmd(policy, model_dir, strategy, out):
    """Assign the five privacy icons for one policy."""
    try:
        engine = _engine(model_dir)
        path = Path(policy)
        engine.ingest(path.stem, path.read_text(encoding="utf-8"))
        assignments = engine.icons(path.stem, strategy)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)
    _emit([a.to_dict() for a in assignments], out)


@main.command("evaluate-qa")
@click.option("--qa", "qa_path", required=True, type=click.Path(exists=True))
@click.option("--policies", required=True, type=click.Path(exists=True))
@click.option("--model-dir", required=True, type=click.Path(exists=True))
@click.option("--corpus", type=click.Path(exists=True),
              help="Corpus for the retrieval baseline's document frequencies.")
@click.option("--k", "ks", default="1,2,3,4", show_default=True)
@click.option("--out", type=click.Path())
def evaluate_qa_cmd(qa_path, policies, model_dir, corpus, ks, out):
    """Score the ranking approaches on a QA test set."""
    try:
        engine = _engine(model_dir)
        docs = load_policies(policies)
        for doc in docs:
            engine.ingest(doc.policy_id, doc.source, url=doc.url)
        counts = {pid: len(engine.segments(pid)) for pid in engine.policy_ids()}
        records = load_qa_dataset(qa_path, segment_counts=counts)
        bm25_index = None
        if corpus:
            bm25_index = build_bm25_index(load_corpus_texts(corpus))
        else:
            texts = [s.text for pid in engine.policy_ids() for s in engine.segments(pid)]
            bm25_index = build_bm25_index(texts)
        k_list = tuple(int(x) for x in ks.split(","))
        report = evaluate_qa(engine, records, ks=k_list, bm25_index=bm25_index)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(qa_report_tables(report, ks=k_list))
    if out:
        Path(out).write_text(json.dumps(report, indent=2) + "\n")


@main.command("evaluate-icons")
@click.option("--annotations", required=True, type=click.Path(exists=True),
              help="Expert annotations (JSON-lines) used as the reference.")
@click.option("--policies", required=True, type=click.Path(exists=True))
@click.option("--model-dir", required=True, type=click.Path(exists=True))
@click.option("--strategy", default="conservative", type=click.Choice(STRATEGIES),
              show_default=True)
@click.option("--out", type=click.Path())
def evaluate_icons_cmd(annotations, policies, model_dir, strategy, out):
    """Compare automatic icon assignments against expert-label icons."""
    try:
        engine = _engine(model_dir)
        docs = load_policies(policies)
        for doc in docs:
            engine.ingest(doc.policy_id, doc.source, url=doc.url)
        records = load_annotations(annotations, engine.taxonomy)
        report = icon_vs_expert(engine, records, engine.policy_ids(), strategy)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(comparison_table(report))
    if out:
        Path(out).write_text(json.dumps(report, indent=2) + "\n")


@main.command("serve")
@click.option("--model-dir", required=True, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve_cmd(model_dir, host, port):
    """Run the HTTP API."""
    import uvicorn

    from .api import create_app

    try:
        engine = _engine(model_dir)
    except (PrivacyLensError, ValueError, OSError) as exc:
        _fail(exc, code="model_missing")
    uvicorn.run(create_app(engine), host=host, port=port)


if __name__ == "__main__":
    main()
