"""Free-form question answering over a policy's segments.

Questions and candidate answers are represented as category-weighted value
vectors over the taxonomy's coordinate system; answers are ranked by a
min-overlap score discounted by the answer's categorization certainty, and
each carries a user-facing confidence combining the score, the question's
certainty, and its fraction of known words. Retrieval (BM25), semantic-
vector distance, and random baselines live here too.
"""

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousQuestionError, NotTrainedError
from .neuralnet import CnnTextClassifier
from .text import tokenize
from .validation import check_probability

__all__ = [
    "PracticeVector",
    "RankedAnswer",
    "QaResult",
    "certainty",
    "practice_vector",
    "rank_score",
    "known_word_fraction",
    "confidence",
    "rank_answers",
    "answer_question",
    "Bm25Index",
    "build_bm25_index",
    "baseline_bm25",
    "baseline_semvec",
    "baseline_random",
    "train_semvec_model",
]


def certainty(category_probs):
    """Entropy-based certainty of a categorization, in [0, 1].

    The probability map is normalized to a distribution; certainty is one
    minus its entropy over ln(label count). Uniform -> 0, one-hot -> 1.
    """
    values = np.asarray(list(category_probs.values()), dtype=np.float64)
    if len(values) < 2:
        raise ValueError("certainty needs at least two categories")
    total = values.sum()
    if total <= 0:
        raise ValueError("category probabilities are all zero")
    p = values / total
    nz = p[p > 0]
    entropy = float(-(nz * np.log(nz)).sum())
    return 1.0 - entropy / math.log(len(values))


@dataclass(frozen=True)
class PracticeVector:
    """Category-weighted value coordinates: coord(c,v) = p(c|x)^2 * p(v|x)."""

    coords: np.ndarray
    source: str  # "answer" | "question"

    def __post_init__(self):
        if ((self.coords < 0) | (self.coords > 1)).any():
            raise ValueError("practice-vector entries must lie in [0, 1]")

    def __len__(self):
        return len(self.coords)


def practice_vector(category_probs, value_probs, taxonomy, source="answer"):
    """Build the coordinate vector over taxonomy.pair_index().

    Uses raw (ungated) probabilities. Coordinates whose category or value
    probability is unavailable (e.g. an attribute model that was skipped in
    training) contribute zero.
    """
    coords = np.zeros(len(taxonomy.pair_index()))
    for i, coord in enumerate(taxonomy.pair_index()):
        p_c = category_probs.get(coord.category, 0.0)
        p_v = value_probs.get((coord.attribute, coord.value), 0.0)
        coords[i] = p_c * p_c * p_v
    return PracticeVector(coords=coords, source=source)


def rank_score(beta, alpha, cer_a):
    """Min-overlap proximity of answer alpha to question beta, in [0, 1].

    score = sum_i(beta_i * min(beta_i, alpha_i)) / sum_i(beta_i^2) * cer_a.
    An all-zero beta means the question carries no signal.
    """
    b = beta.coords if isinstance(beta, PracticeVector) else np.asarray(beta, dtype=float)
    a = alpha.coords if isinstance(alpha, PracticeVector) else np.asarray(alpha, dtype=float)
    if b.shape != a.shape:
        raise ValueError("question and answer vectors use different coordinate systems")
    check_probability(cer_a, "cer_a")
    denom = float(b @ b)
    if denom == 0.0:
        raise AmbiguousQuestionError("question vector carries no signal")
    return float((b * np.minimum(b, a)).sum() / denom) * cer_a


def known_word_fraction(question, embedding_model):
    """Share of question tokens present in the embedding vocabulary.

    Counts word-table membership only; the n-gram fallback does not count
    as "known" here.
    """
    tokens = tokenize(question)
    if not tokens:
        raise ValueError("question has no tokens")
    known = sum(1 for t in tokens if t in embedding_model.vocab)
    return known / len(tokens)


def confidence(score, cer_q, frac_q):
    """conf = score * (cer_q + frac_q) / 2; monotone in every argument."""
    check_probability(score, "score")
    check_probability(cer_q, "cer_q")
    check_probability(frac_q, "frac_q")
    return score * (cer_q + frac_q) / 2.0


@dataclass(frozen=True)
class RankedAnswer:
    policy_id: str
    segment_index: int
    text: str
    score: float
    confidence: float
    rank: int  # 1-based
    conflict_with: frozenset = frozenset()  # segment indices
    low_confidence: bool = False

    def to_dict(self):
        return {
            "segment_index": self.segment_index,
            "text": self.text,
            "score": self.score,
            "confidence": self.confidence,
            "rank": self.rank,
            "conflicts": sorted(self.conflict_with),
            "low_confidence": self.low_confidence,
        }


@dataclass(frozen=True)
class QaResult:
    answers: tuple
    cer_q: float
    frac_q: float
    possibly_unanswerable: bool
    notices: tuple = ()


def _present_or_dominant_categories(annotation, threshold=0.5):
    present = {c for c, p in annotation.category_probs.items() if p > threshold}
    return present or {annotation.dominant_category()}


def rank_answers(
    hierarchy,
    segments,
    question,
    annotations=None,
    accept_threshold=0.6,
    conflict_top_k=3,
):
    """Score and order every segment as a candidate answer to the question.

    Ties break by document order. Conflicts are flagged among the top
    ``conflict_top_k`` answers: opposite dominant polarity on overlapping
    categories marks both answers. Raises AmbiguousQuestionError when the
    question produces an all-zero vector.
    """
    taxonomy = hierarchy.taxonomy
    query_probs = hierarchy.classify_query(question)
    beta = practice_vector(
        query_probs, hierarchy.query_value_probs(question), taxonomy, source="question"
    )
    cer_q = certainty(query_probs)
    frac_q = known_word_fraction(question, hierarchy.embedding_model)

    if annotations is None:
        annotations = [hierarchy.classify_segment(seg) for seg in segments]

    scored = []
    for seg, ann in zip(segments, annotations):
        alpha = practice_vector(ann.category_probs, ann.value_probs, taxonomy, source="answer")
        s = rank_score(beta, alpha, certainty(ann.category_probs))
        scored.append((seg, ann, s, confidence(s, cer_q, frac_q)))

    scored.sort(key=lambda row: (-row[2], row[0].index))

    conflicts = {seg.index: set() for seg, _, _, _ in scored}
    top = scored[:conflict_top_k]
    for i in range(len(top)):
        for j in range(i + 1, len(top)):
            ann_i, ann_j = top[i][1], top[j][1]
            pol_i, pol_j = ann_i.dominant_polarity(), ann_j.dominant_polarity()
            if pol_i is None or pol_j is None or pol_i == pol_j:
                continue
            cats_i = _present_or_dominant_categories(ann_i)
            cats_j = _present_or_dominant_categories(ann_j)
            if cats_i & cats_j:
                conflicts[top[i][0].index].add(top[j][0].index)
                conflicts[top[j][0].index].add(top[i][0].index)

    answers = [
        RankedAnswer(
            policy_id=seg.policy_id,
            segment_index=seg.index,
            text=seg.text,
            score=s,
            confidence=conf,
            rank=rank,
            conflict_with=frozenset(conflicts[seg.index]),
            low_confidence=conf < accept_threshold,
        )
        for rank, (seg, _ann, s, conf) in enumerate(scored, start=1)
    ]
    return answers, cer_q, frac_q


def answer_question(
    hierarchy,
    segments,
    question,
    annotations=None,
    accept_threshold=0.6,
    ambiguity_threshold=0.2,
    top_k=3,
):
    """rank_answers plus user-facing diagnostics (the chat response shape)."""
    answers, cer_q, frac_q = rank_answers(
        hierarchy, segments, question, annotations=annotations, accept_threshold=accept_threshold
    )
    notices = []
    unanswerable = bool(answers) and answers[0].confidence < accept_threshold
    if unanswerable:
        notices.append("low_confidence")
    if cer_q < ambiguity_threshold:
        notices.append("ambiguous_question")
    if frac_q < 0.5:
        notices.append("unknown_words")
    return QaResult(
        answers=tuple(answers[:top_k]),
        cer_q=cer_q,
        frac_q=frac_q,
        possibly_unanswerable=unanswerable,
        notices=tuple(notices),
    )


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bm25Index:
    """Corpus-level document frequencies with BM25 parameters.

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)), computed over an external
    corpus rather than the single policy being queried.
    """

    doc_freq: dict
    doc_count: int
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if self.doc_count <= 0:
            raise ValueError("index is empty")
        if self.k1 <= 0 or not 0 <= self.b <= 1:
            raise ValueError("k1 must be > 0 and b in [0, 1]")

    def idf(self, term):
        df = self.doc_freq.get(term, 0)
        return math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))


def build_bm25_index(corpus_texts, k1=1.2, b=0.75):
    doc_freq = {}
    count = 0
    for text in corpus_texts:
        count += 1
        for term in set(tokenize(text)):
            doc_freq[term] = doc_freq.get(term, 0) + 1
    return Bm25Index(doc_freq=doc_freq, doc_count=count, k1=k1, b=b)


def bm25_scores(index, question, segments):
    seg_tokens = [tokenize(seg.text) for seg in segments]
    if not segments:
        return []
    avgdl = sum(len(toks) for toks in seg_tokens) / len(seg_tokens)
    scores = []
    q_terms = tokenize(question)
    for seg, toks in zip(segments, seg_tokens):
        tf = {}
        for t in toks:
            tf[t] = tf.get(t, 0) + 1
        norm = index.k1 * (1.0 - index.b + index.b * len(toks) / avgdl) if avgdl else index.k1
        s = 0.0
        for term in q_terms:
            f = tf.get(term, 0)
            if f:
                s += index.idf(term) * f * (index.k1 + 1.0) / (f + norm)
        scores.append((seg, s))
    return scores


def baseline_bm25(index, question, segments):
    """Segments ordered by BM25 score, ties broken by document order."""
    scored = bm25_scores(index, question, segments)
    scored.sort(key=lambda row: (-row[1], row[0].index))
    return [seg for seg, _ in scored]


def baseline_semvec(single_model, question, segments):
    """Segments ordered by Euclidean distance between semantic vectors."""
    if not single_model.is_initialized:
        raise NotTrainedError("semantic-vector model is not trained")
    q_vec = single_model.semantic_vector(question)
    scored = [
        (seg, float(np.linalg.norm(q_vec - single_model.semantic_vector(seg.text))))
        for seg in segments
    ]
    scored.sort(key=lambda row: (row[1], row[0].index))
    return [seg for seg, _ in scored]


def baseline_random(segments, seed=0):
    """Uniform random permutation, deterministic per seed."""
    rng = random.Random(seed)
    shuffled = list(segments)
    rng.shuffle(shuffled)
    return shuffled


def train_semvec_model(taxonomy, embedding_model, merged_labels, split, config):
    """Single flat classifier over all mandatory attribute-values.

    Classes are ``attribute=value`` pairs from mandatory attributes with
    more than ``config.min_value_annotations`` training annotations; its
    penultimate activations are the vectors the distance baseline ranks by.
    """
    mandatory = {a.id for a in taxonomy.attributes if a.mandatory}
    value_counts = {}
    train_rows = []
    for (policy_id, _idx), (_cats, pairs, text) in sorted(merged_labels.items()):
        if policy_id not in split.train_policy_ids:
            continue
        pairs = {(a, v) for a, v in pairs if a in mandatory}
        train_rows.append((text, pairs))
        for pair in pairs:
            value_counts[pair] = value_counts.get(pair, 0) + 1
    classes = sorted(
        f"{a}={v}"
        for (a, v), n in value_counts.items()
        if n > config.min_value_annotations
    )
    if not classes:
        raise ValueError("no attribute-value class clears the annotation threshold")
    model = CnnTextClassifier(
        embedding_model=embedding_model, label_ids=tuple(classes), **config.cnn_kwargs()
    )
    class_set = set(classes)
    X = [text for text, _ in train_rows]
    y = [{f"{a}={v}" for a, v in pairs} & class_set for _, pairs in train_rows]
    model.fit(X, y)
    return model
