"""Evaluation statistics: classification, ranking, and agreement metrics.

Conventions adopted throughout (documented once here):

* undefined precision/recall ratios (0/0) evaluate to 0, keeping macro
  averages total;
* ideal DCG truncates at min(k, number of relevant items);
* questions with an empty ground-truth set count as misses in the top-k
  score but are excluded from NDCG/MAP means.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .validation import check_distribution, check_same_length

__all__ = [
    "RankedPrediction",
    "ConfusionCounts",
    "macro_prf",
    "top1_precision",
    "top_k_score",
    "ndcg_at_k",
    "average_precision",
    "mean_average_precision",
    "bucketed_map",
    "hellinger",
    "cohen_kappa",
    "format_table",
]


@dataclass(frozen=True)
class RankedPrediction:
    """An ordered candidate list plus the ground-truth relevant set."""

    ranking: tuple  # candidate indices, best first
    relevant: frozenset

    def __post_init__(self):
        object.__setattr__(self, "ranking", tuple(self.ranking))
        object.__setattr__(self, "relevant", frozenset(self.relevant))
        if len(set(self.ranking)) != len(self.ranking):
            raise ValueError("ranking contains duplicate candidates")


@dataclass
class ConfusionCounts:
    """Per-label binary confusion counts for multi-label predictions."""

    labels: list
    tp: dict = field(default_factory=dict)
    fp: dict = field(default_factory=dict)
    tn: dict = field(default_factory=dict)
    fn: dict = field(default_factory=dict)

    def __post_init__(self):
        for label in self.labels:
            self.tp.setdefault(label, 0)
            self.fp.setdefault(label, 0)
            self.tn.setdefault(label, 0)
            self.fn.setdefault(label, 0)

    @classmethod
    def from_predictions(cls, labels, predicted_sets, truth_sets):
        """Tally counts from parallel lists of predicted/true label sets."""
        check_same_length(predicted_sets, truth_sets, "predicted_sets", "truth_sets")
        cc = cls(labels=list(labels))
        for pred, truth in zip(predicted_sets, truth_sets):
            pred, truth = set(pred), set(truth)
            for label in cc.labels:
                p, t = label in pred, label in truth
                if p and t:
                    cc.tp[label] += 1
                elif p and not t:
                    cc.fp[label] += 1
                elif not p and t:
                    cc.fn[label] += 1
                else:
                    cc.tn[label] += 1
        return cc

    def add(self, label, predicted, actual):
        if predicted and actual:
            self.tp[label] += 1
        elif predicted:
            self.fp[label] += 1
        elif actual:
            self.fn[label] += 1
        else:
            self.tn[label] += 1

    def support(self, label):
        return self.tp[label] + self.fn[label]


def _ratio(num, den):
    return num / den if den else 0.0


def _prf(tp, fp, fn):
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = _ratio(2 * p * r, p + r)
    return p, r, f1


def macro_prf(cc):
    """Presence/absence-averaged precision, recall, and F1.

    For each label the presence direction scores predicting the label and the
    absence direction scores predicting its complement; the label's figures
    are the mean of the two directions. This penalizes the degenerate
    predict-everything model, which would otherwise reach perfect
    presence-only precision and recall.

    Returns {"per_label": {label: {...}}, "macro": {...}, "weighted": {...}}
    where the weighted average weights labels by presence support.
    """
    per_label = {}
    for label in cc.labels:
        tp, fp, tn, fn = cc.tp[label], cc.fp[label], cc.tn[label], cc.fn[label]
        pres = _prf(tp, fp, fn)
        #   absence: "predicted absent" is the positive class
        absn = _prf(tn, fn, fp)
        per_label[label] = {
            "precision": (pres[0] + absn[0]) / 2,
            "recall": (pres[1] + absn[1]) / 2,
            "f1": (pres[2] + absn[2]) / 2,
            "support": tp + fn,
        }
    n = len(cc.labels)
    macro = {
        key: _ratio(sum(per_label[lab][key] for lab in cc.labels), n)
        for key in ("precision", "recall", "f1")
    }
    total_support = sum(per_label[lab]["support"] for lab in cc.labels)
    weighted = {
        key: _ratio(
            sum(per_label[lab][key] * per_label[lab]["support"] for lab in cc.labels),
            total_support,
        )
        for key in ("precision", "recall", "f1")
    }
    return {"per_label": per_label, "macro": macro, "weighted": weighted}


def top1_precision(preds):
    """Fraction of (top_label, truth_set) pairs where the top label is in the truth.

    Rows with empty truth must be excluded by the caller; an empty input is an
    error rather than a silent 0.
    """
    if not preds:
        raise ValueError("top1_precision needs at least one prediction")
    hits = 0
    for top_label, truth in preds:
        if not truth:
            raise ValueError("empty truth set; exclude such rows upstream")
        hits += top_label in set(truth)
    return hits / len(preds)


def top_k_score(preds, k):
    """Fraction of questions with at least one relevant answer in the top k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not preds:
        return 0.0
    hits = sum(1 for p in preds if set(p.ranking[:k]) & p.relevant)
    return hits / len(preds)


def ndcg_at_k(pred, k):
    """Normalized discounted cumulative gain with binary relevance.

    DCG_k = sum_{i=1..k} rel_i / log2(i+1); the normalizer packs the relevant
    items at the top, truncated at min(k, |relevant|). Returns 0 when no
    relevant items exist.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n_rel = len(pred.relevant)
    if n_rel == 0:
        return 0.0
    dcg = sum(
        1.0 / math.log2(i + 2)
        for i, cand in enumerate(pred.ranking[:k])
        if cand in pred.relevant
    )
    ideal = sum(1.0 / math.log2(i + 2) for i in range(min(k, n_rel)))
    return dcg / ideal


def average_precision(pred):
    """Area under the precision-recall curve for one ranked list."""
    n_rel = len(pred.relevant)
    if n_rel == 0:
        return 0.0
    hits = 0
    total = 0.0
    for i, cand in enumerate(pred.ranking):
        if cand in pred.relevant:
            hits += 1
            total += hits / (i + 1)
    return total / n_rel


def mean_average_precision(preds):
    """Mean AP over questions; empty-ground-truth questions are excluded."""
    scored = [average_precision(p) for p in preds if p.relevant]
    if not scored:
        raise ValueError("no questions with non-empty ground truth")
    return sum(scored) / len(scored)


def bucketed_map(preds, policy_lengths):
    """MAP per policy-length bucket (short/medium/long).

    Bucket edges are the 33rd and 66th percentiles of the supplied length
    distribution; each question is assigned by its own policy's length.
    """
    check_same_length(preds, policy_lengths, "preds", "policy_lengths")
    lengths = np.asarray(policy_lengths, dtype=float)
    lo, hi = np.percentile(lengths, [33, 66])
    buckets = {"short": [], "medium": [], "long": []}
    for pred, length in zip(preds, policy_lengths):
        if length <= lo:
            buckets["short"].append(pred)
        elif length <= hi:
            buckets["medium"].append(pred)
        else:
            buckets["long"].append(pred)
    out = {"edges": (float(lo), float(hi))}
    for name, items in buckets.items():
        answerable = [p for p in items if p.relevant]
        out[name] = {
            "map": mean_average_precision(answerable) if answerable else None,
            "count": len(items),
        }
    return out


def hellinger(p, q):
    """Hellinger distance sqrt(1 - sum(sqrt(p_i * q_i))) between distributions."""
    p = check_distribution(p, "p")
    q = check_distribution(q, "q")
    check_same_length(p, q, "p", "q")
    affinity = np.sqrt(p * q).sum()
    return math.sqrt(max(0.0, 1.0 - affinity))


def cohen_kappa(labels_a, labels_b, label_universe=None):
    """Chance-corrected agreement between two raters over one label sequence.

    When expected agreement is exactly 1 (both raters constant on the same
    label), kappa is defined as 1 for perfect observed agreement and 0
    otherwise.
    """
    check_same_length(labels_a, labels_b, "labels_a", "labels_b")
    if not labels_a:
        raise ValueError("empty label sequences")
    if label_universe is None:
        label_universe = sorted(set(labels_a) | set(labels_b))
    universe = set(label_universe)
    unknown = (set(labels_a) | set(labels_b)) - universe
    if unknown:
        raise ValueError(f"labels outside the universe: {sorted(unknown)}")
    n = len(labels_a)
    p_o = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    p_e = sum(
        (labels_a.count(lab) / n) * (labels_b.count(lab) / n) for lab in label_universe
    )
    if abs(1.0 - p_e) < 1e-12:
        return 1.0 if abs(1.0 - p_o) < 1e-12 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def format_table(headers, rows, title=None):
    """Aligned plain-text table for metric reports."""
    cols = [[str(h)] + [str(r[i]) for r in rows] for i, h in enumerate(headers)]
    widths = [max(len(cell) for cell in col) for col in cols]
    lines = []
    if title:
        lines.append(title)
    lines.append("  ".join(h.ljust(w) for h, w in zip(map(str, headers), widths)))
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
