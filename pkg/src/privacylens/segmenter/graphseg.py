"""Similarity-graph segmentation of long text blocks.

Sentences become graph nodes with edges where the cosine similarity of
their mean word vectors reaches a threshold; contiguous runs that form
cliques merge into one segment (a greedy longest-feasible-prefix sweep).
Segments shorter than a minimum sentence count are merged into their
predecessor afterwards.
"""

from dataclasses import dataclass

import numpy as np

from ..embeddings import cosine_similarity, word_vector
from ..text import tokenize
from .sentences import split_sentences

__all__ = ["SentenceGraph", "build_sentence_graph", "partition_clique_runs", "fine_segment"]


@dataclass(frozen=True)
class SentenceGraph:
    sentences: tuple
    similarity: np.ndarray  # symmetric, unit diagonal
    threshold: float

    def __post_init__(self):
        n = len(self.sentences)
        if self.similarity.shape != (n, n):
            raise ValueError("similarity matrix does not match sentence count")
        if not np.allclose(self.similarity, self.similarity.T, atol=1e-9):
            raise ValueError("similarity matrix must be symmetric")
        if not np.allclose(np.diag(self.similarity), 1.0, atol=1e-9):
            raise ValueError("similarity matrix must have a unit diagonal")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")


def sentence_vector(sentence, emb):
    """Mean word vector of the sentence's tokens (zero vector if none)."""
    vectors = [word_vector(emb, tok) for tok in tokenize(sentence)]
    if not vectors:
        return np.zeros(emb.dim)
    return np.mean(vectors, axis=0)


def build_sentence_graph(sentences, emb, threshold):
    vecs = [sentence_vector(s, emb) for s in sentences]
    n = len(sentences)
    sim = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            sim[i, j] = sim[j, i] = cosine_similarity(vecs[i], vecs[j])
    return SentenceGraph(sentences=tuple(sentences), similarity=sim, threshold=threshold)


def partition_clique_runs(similarity, threshold, min_len=1):
    """Contiguous-run partition where every run is a similarity clique.

    Greedy sweep: a sentence joins the current run iff its similarity to
    every sentence already in the run is >= threshold (ties merge). Runs
    shorter than min_len then merge into the preceding run (the first run
    merges forward). Returns a list of (start, end) index pairs, end
    exclusive.
    """
    n = similarity.shape[0]
    if n == 0:
        return []
    runs = []
    start = 0
    for j in range(1, n):
        if all(similarity[j, m] >= threshold for m in range(start, j)):
            continue
        runs.append((start, j))
        start = j
    runs.append((start, n))

    if min_len > 1 and len(runs) > 1:
        merged = [runs[0]]
        for run in runs[1:]:
            prev = merged[-1]
            # a short run joins its predecessor; a short head absorbs forward
            if (run[1] - run[0]) < min_len or (prev[1] - prev[0]) < min_len:
                merged[-1] = (prev[0], run[1])
            else:
                merged.append(run)
        runs = merged
    return runs


def fine_segment(raw, emb, threshold=0.25, min_len=2):
    """Split one text block into semantically coherent sub-segments.

    The concatenation of the output equals the input sentence-for-sentence;
    split points fall only at sentence boundaries. Single-sentence input is
    returned unchanged.
    """
    sentences = split_sentences(raw)
    if len(sentences) <= 1:
        return [raw] if raw.strip() else []
    graph = build_sentence_graph(sentences, emb, threshold)
    runs = partition_clique_runs(graph.similarity, threshold, min_len=min_len)
    return [" ".join(sentences[a:b]) for a, b in runs]
