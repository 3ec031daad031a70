"""Loaders for policies, expert annotations, QA test sets, and splits.

Annotation and QA files are JSON-lines (one record per line). The native
spreadsheet layout of the source annotation corpus is handled by a
converter rather than natively, keeping third-party format quirks out of
the loaders.
"""

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, UnknownLabelError

__all__ = [
    "PolicyDocument",
    "AnnotatedSegmentRecord",
    "QARecord",
    "DatasetSplit",
    "load_policies",
    "load_annotations",
    "union_expert_labels",
    "split_dataset",
    "load_qa_dataset",
    "load_corpus_texts",
    "convert_opp115_csv",
]


@dataclass(frozen=True)
class PolicyDocument:
    policy_id: str
    source: str
    url: str = None

    def __post_init__(self):
        if not self.policy_id:
            raise ValueError("policy_id must be non-empty")
        if not self.source or not self.source.strip():
            raise ValueError(f"policy {self.policy_id!r}: source must be non-empty")


@dataclass(frozen=True)
class AnnotatedSegmentRecord:
    policy_id: str
    segment_index: int
    text: str
    annotator_id: str
    categories: frozenset
    attribute_values: frozenset  # of (attribute_id, value_id)

    def __post_init__(self):
        if self.segment_index < 0:
            raise ValueError("segment_index must be >= 0")


@dataclass(frozen=True)
class QARecord:
    question: str
    policy_id: str
    ground_truth: frozenset

    def __post_init__(self):
        if not self.question.strip():
            raise ValueError("question must be non-empty")

    @property
    def answerable(self):
        return bool(self.ground_truth)


@dataclass(frozen=True)
class DatasetSplit:
    train_policy_ids: frozenset
    test_policy_ids: frozenset

    def __post_init__(self):
        overlap = self.train_policy_ids & self.test_policy_ids
        if overlap:
            raise ValueError(f"train/test overlap: {sorted(overlap)}")


def load_policies(directory):
    """Read every `<policy_id>.html` / `.txt` file in a directory."""
    docs = []
    for path in sorted(Path(directory).iterdir()):
        if path.suffix.lower() not in (".html", ".htm", ".txt"):
            continue
        docs.append(PolicyDocument(policy_id=path.stem, source=path.read_text(encoding="utf-8")))
    seen = set()
    for doc in docs:
        if doc.policy_id in seen:
            raise ParseError(f"duplicate policy_id {doc.policy_id!r}")
        seen.add(doc.policy_id)
    return docs


def _iter_jsonl(source):
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        text = str(source)
        looks_like_content = not text.strip() or text.lstrip().startswith("{")
        if isinstance(source, Path) or (not looks_like_content and "\n" not in text):
            lines = Path(source).read_text(encoding="utf-8").splitlines()
        else:
            lines = text.splitlines()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            yield lineno, json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line=lineno) from exc


def load_annotations(source, taxonomy):
    """Parse annotation records, validating every label against the taxonomy."""
    records = []
    offenders = []
    for lineno, raw in _iter_jsonl(source):
        for key in ("policy_id", "segment_index", "text", "annotator"):
            if key not in raw:
                raise ParseError("missing field", line=lineno, field=key)
        categories = frozenset(raw.get("categories", []))
        pairs = frozenset(
            (av["attribute"], av["value"]) for av in raw.get("attribute_values", [])
        )
        for cid in categories:
            if not taxonomy.has_category(cid):
                offenders.append(f"line {lineno}: category {cid!r}")
        for aid, vid in pairs:
            if not taxonomy.has_attribute(aid):
                offenders.append(f"line {lineno}: attribute {aid!r}")
            elif not taxonomy.has_value(aid, vid):
                offenders.append(f"line {lineno}: value {aid!r}={vid!r}")
        records.append(
            AnnotatedSegmentRecord(
                policy_id=raw["policy_id"],
                segment_index=int(raw["segment_index"]),
                text=raw["text"],
                annotator_id=raw["annotator"],
                categories=categories,
                attribute_values=pairs,
            )
        )
    if offenders:
        raise UnknownLabelError(
            f"{len(offenders)} labels not in the taxonomy", offenders=offenders
        )
    return records


def union_expert_labels(records):
    """Merge labels per (policy, segment): set-union across annotators.

    Returns {(policy_id, segment_index): (categories, attribute_values, text)}.
    Idempotent and order-independent.
    """
    merged = {}
    for rec in records:
        key = (rec.policy_id, rec.segment_index)
        if key in merged:
            cats, pairs, text = merged[key]
            merged[key] = (cats | rec.categories, pairs | rec.attribute_values, text)
        else:
            merged[key] = (rec.categories, rec.attribute_values, rec.text)
    return merged


def split_dataset(records, train_count, seed=0):
    """Policy-level train/test split, deterministic per seed."""
    policy_ids = sorted({rec.policy_id for rec in records})
    if train_count > len(policy_ids):
        raise ValueError(
            f"train_count {train_count} exceeds {len(policy_ids)} distinct policies"
        )
    rng = random.Random(seed)
    shuffled = policy_ids[:]
    rng.shuffle(shuffled)
    return DatasetSplit(
        train_policy_ids=frozenset(shuffled[:train_count]),
        test_policy_ids=frozenset(shuffled[train_count:]),
    )


def load_qa_dataset(source, segment_counts=None):
    """Parse QA records; empty ground_truth marks an unanswerable question.

    ``segment_counts`` maps policy_id -> segment count; when given, records
    referencing unknown policies or out-of-range indices are rejected.
    """
    records = []
    for lineno, raw in _iter_jsonl(source):
        for key in ("question", "policy_id"):
            if key not in raw:
                raise ParseError("missing field", line=lineno, field=key)
        truth = frozenset(int(i) for i in raw.get("ground_truth", []))
        if segment_counts is not None:
            if raw["policy_id"] not in segment_counts:
                raise ParseError(
                    f"unknown policy {raw['policy_id']!r}", line=lineno, field="policy_id"
                )
            count = segment_counts[raw["policy_id"]]
            bad = [i for i in truth if not 0 <= i < count]
            if bad:
                raise ParseError(
                    f"ground-truth indices {sorted(bad)} out of range for "
                    f"{raw['policy_id']!r} ({count} segments)",
                    line=lineno,
                    field="ground_truth",
                )
        records.append(
            QARecord(question=raw["question"], policy_id=raw["policy_id"], ground_truth=truth)
        )
    return records


def load_corpus_texts(source):
    """Newline-delimited plain-text documents for embedding training."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line.strip()]


def convert_opp115_csv(csv_source, policy_id, annotator_id="expert"):
    """Convert one native annotation CSV into JSON-lines records.

    Expected columns: segment_index, category, attribute, value; one row per
    attribute-value pair. Rows sharing a segment_index fold into one record.
    """
    if hasattr(csv_source, "read"):
        rows = list(csv.DictReader(csv_source))
    else:
        with open(csv_source, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    by_segment = {}
    for row in rows:
        idx = int(row["segment_index"])
        entry = by_segment.setdefault(
            idx, {"categories": set(), "pairs": set(), "text": row.get("text", "")}
        )
        if row.get("category"):
            entry["categories"].add(row["category"])
        if row.get("attribute") and row.get("value"):
            entry["pairs"].add((row["attribute"], row["value"]))
    lines = []
    for idx in sorted(by_segment):
        entry = by_segment[idx]
        lines.append(
            json.dumps(
                {
                    "policy_id": policy_id,
                    "segment_index": idx,
                    "text": entry["text"],
                    "annotator": annotator_id,
                    "categories": sorted(entry["categories"]),
                    "attribute_values": [
                        {"attribute": a, "value": v} for a, v in sorted(entry["pairs"])
                    ],
                }
            )
        )
    return "\n".join(lines)
