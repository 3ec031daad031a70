"""Evaluation harnesses: QA approaches side by side, and icon agreement."""

from ..corpus_io import union_expert_labels
from ..errors import AmbiguousQuestionError
from ..icons import LabeledPolicy, assign_all, compare_assignments
from ..metrics import (
    RankedPrediction,
    bucketed_map,
    format_table,
    mean_average_precision,
    ndcg_at_k,
    top_k_score,
)
from ..qa import baseline_bm25, baseline_random, baseline_semvec, rank_answers

__all__ = ["evaluate_qa", "qa_report_tables", "evaluate_icons", "icon_vs_expert"]


def _rankings_for(engine, record, bm25_index, seed):
    entry = engine.entry(record.policy_id)
    segments = entry.segments
    out = {}
    try:
        answers, _, _ = rank_answers(
            engine.hierarchy, segments, record.question, annotations=entry.annotations
        )
        out["class_match"] = [a.segment_index for a in answers]
    except AmbiguousQuestionError:
        out["class_match"] = []
    if bm25_index is not None:
        out["bm25"] = [s.index for s in baseline_bm25(bm25_index, record.question, segments)]
    if engine.semvec_model is not None:
        out["semvec"] = [
            s.index for s in baseline_semvec(engine.semvec_model, record.question, segments)
        ]
    out["random"] = [s.index for s in baseline_random(segments, seed=seed)]
    return out


def evaluate_qa(engine, qa_records, ks=(1, 2, 3, 4), bm25_index=None):
    """Top-k / NDCG@k / MAP (with policy-length buckets) per approach.

    Questions with empty ground truth count as misses in top-k and are
    excluded from the NDCG/MAP means.
    """
    approaches = {}
    lengths = []
    for i, record in enumerate(qa_records):
        rankings = _rankings_for(engine, record, bm25_index, seed=i)
        lengths.append(len(engine.entry(record.policy_id).segments))
        for name, ranking in rankings.items():
            approaches.setdefault(name, []).append(
                RankedPrediction(ranking=tuple(ranking), relevant=record.ground_truth)
            )

    report = {}
    for name, preds in approaches.items():
        answerable = [p for p in preds if p.relevant]
        entry = {
            "top_k": {k: top_k_score(preds, k) for k in ks},
            "ndcg": {
                k: (
                    sum(ndcg_at_k(p, k) for p in answerable) / len(answerable)
                    if answerable
                    else None
                )
                for k in ks
            },
            "map": mean_average_precision(answerable) if answerable else None,
        }
        answerable_lengths = [
            n for p, n in zip(preds, lengths) if p.relevant
        ]
        if answerable:
            entry["bucketed_map"] = bucketed_map(answerable, answerable_lengths)
        report[name] = entry
    return report


def qa_report_tables(report, ks=(1, 2, 3, 4)):
    names = sorted(report)
    tables = []
    rows = [
        [name] + [f"{report[name]['top_k'][k]:.3f}" for k in ks] for name in names
    ]
    tables.append(format_table(["approach"] + [f"top-{k}" for k in ks], rows, "Top-k score"))
    rows = []
    for name in names:
        vals = []
        for k in ks:
            v = report[name]["ndcg"][k]
            vals.append("n/a" if v is None else f"{v:.3f}")
        rows.append([name] + vals)
    tables.append(format_table(["approach"] + [f"ndcg@{k}" for k in ks], rows, "NDCG"))
    rows = []
    for name in names:
        v = report[name]["map"]
        row = [name, "n/a" if v is None else f"{v:.3f}"]
        buckets = report[name].get("bucketed_map", {})
        for b in ("short", "medium", "long"):
            bv = buckets.get(b, {}).get("map")
            row.append("n/a" if bv is None else f"{bv:.3f}")
        rows.append(row)
    tables.append(
        format_table(["approach", "MAP", "short", "medium", "long"], rows, "MAP (length buckets)")
    )
    return "\n\n".join(tables)


def expert_labeled_policy(policy_id, records, segment_count):
    """LabeledPolicy from expert annotations (labels unioned across raters)."""
    merged = union_expert_labels([r for r in records if r.policy_id == policy_id])
    per_segment = []
    for idx in range(segment_count):
        cats, pairs, _text = merged.get((policy_id, idx), (frozenset(), frozenset(), ""))
        per_segment.append((cats, pairs))
    return LabeledPolicy.from_label_sets(policy_id, per_segment)


def icon_vs_expert(engine, records, policy_ids, strategy="conservative"):
    """Compare engine-assigned icons against expert-annotation icons."""
    auto_rows, expert_rows = [], []
    for pid in policy_ids:
        segment_count = len(engine.entry(pid).segments)
        auto_rows.append(engine.icons(pid, strategy))
        expert_rows.append(
            assign_all(expert_labeled_policy(pid, records, segment_count), strategy)
        )
    return compare_assignments(auto_rows, expert_rows)


def evaluate_icons(assignments_a, assignments_b):
    return compare_assignments(assignments_a, assignments_b)
