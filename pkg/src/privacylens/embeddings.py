"""Domain word embeddings with character n-gram subwords.

A word's vector is composed from a per-word table entry plus hashed
character n-gram (sizes 3..6 by default) bucket vectors, so vectors exist
for any non-empty token, including misspellings never seen in training.
Training is skip-gram with negative sampling over the subword bags,
single-threaded and deterministic per seed.
"""

import hashlib
import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ModelPersistenceError
from .text import tokenize
from .validation import check_positive

__all__ = [
    "SubwordEmbeddingModel",
    "subword_ngrams",
    "ngram_bucket",
    "word_vector",
    "cosine_similarity",
    "SkipgramEmbeddings",
    "train_skipgram",
    "save_model",
    "load_model",
    "load_text_vectors",
]

_MAGIC = b"PLEM"
_VERSION = 1

_FNV_OFFSET = 2166136261
_FNV_PRIME = 16777619
_U32 = 2**32


def ngram_bucket(ngram, bucket_count):
    """FNV-1a (32-bit) hash of the n-gram, reduced modulo the bucket count.

    Pure function of its inputs; identical across runs and platforms.
    """
    h = _FNV_OFFSET
    for byte in ngram.encode("utf-8"):
        h = (h ^ byte) * _FNV_PRIME % _U32
    return h % bucket_count


def subword_ngrams(word, min_n=3, max_n=6):
    """All substrings of the boundary-wrapped word with lengths min_n..max_n.

    The word is wrapped as ``<word>`` so prefixes/suffixes hash distinctly
    from word-internal substrings. Order is by start position, then length.
    """
    if not word:
        raise ValueError("word must be non-empty")
    wrapped = f"<{word}>"
    grams = []
    for start in range(len(wrapped)):
        for n in range(min_n, max_n + 1):
            end = start + n
            if end > len(wrapped):
                break
            grams.append(wrapped[start:end])
    return grams


@dataclass
class SubwordEmbeddingModel:
    """Word + n-gram bucket vector tables.

    ``input_vectors`` stacks the vocab rows (one per word, in ``vocab``
    order) followed by ``bucket_count`` n-gram bucket rows.
    """

    dim: int
    vocab: dict  # word -> row index in [0, len(vocab))
    input_vectors: np.ndarray  # (len(vocab) + bucket_count, dim)
    bucket_count: int
    min_n: int = 3
    max_n: int = 6
    trained: bool = True
    word_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        check_positive(self.dim, "dim")
        check_positive(self.bucket_count, "bucket_count")
        if self.min_n > self.max_n:
            raise ValueError("min_n must be <= max_n")
        expected = len(self.vocab) + self.bucket_count
        if self.input_vectors.shape != (expected, self.dim):
            raise ValueError(
                f"input_vectors shape {self.input_vectors.shape} != ({expected}, {self.dim})"
            )

    def __contains__(self, word):
        return word in self.vocab

    def constituent_rows(self, word):
        """Row indices whose mean is the word's vector.

        In-vocab words contribute their vocab row plus their n-gram buckets,
        minus the full wrapped form (the whole word's signal already comes
        from the vocab row). Out-of-vocab words use n-gram buckets alone.
        """
        if not word:
            raise ValueError("word must be non-empty")
        offset = len(self.vocab)
        grams = subword_ngrams(word, self.min_n, self.max_n)
        if word in self.vocab:
            wrapped = f"<{word}>"
            rows = [self.vocab[word]]
            rows.extend(
                offset + ngram_bucket(g, self.bucket_count) for g in grams if g != wrapped
            )
        else:
            rows = [offset + ngram_bucket(g, self.bucket_count) for g in grams]
        return rows

    def fingerprint(self):
        """Stable digest of the full parameter state (used to pin classifiers)."""
        h = hashlib.sha256()
        h.update(
            json.dumps(
                [self.dim, self.min_n, self.max_n, self.bucket_count, sorted(self.vocab.items())]
            ).encode()
        )
        h.update(np.ascontiguousarray(self.input_vectors, dtype=np.float64).tobytes())
        return h.hexdigest()


def word_vector(model, word):
    """Vector for any non-empty token; never fails on out-of-vocabulary words."""
    rows = model.constituent_rows(word)
    return model.input_vectors[rows].mean(axis=0)


def cosine_similarity(u, v):
    """Standard cosine in [-1, 1]; similarity with a zero vector is 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def skipgram_example_loss_grads(input_vectors, output_vectors, constituent_rows, ctx_id, neg_ids):
    """Negative-sampling loss for one (center, context, negatives) example.

    Returns (loss, grad_input_rows, grad_out) where grad_input_rows is the
    gradient for each constituent row (all equal under mean composition) and
    grad_out maps output row -> gradient. Kept separate from the training
    loop so finite-difference checks can call it directly.
    """
    h = input_vectors[constituent_rows].mean(axis=0)
    targets = [ctx_id] + list(neg_ids)
    signs = np.array([1.0] + [-1.0] * len(neg_ids))
    u = output_vectors[targets]
    scores = _sigmoid(signs * (u @ h))
    scores = np.clip(scores, 1e-12, 1.0)
    loss = -np.log(scores).sum()
    # d loss / d (u_t . h) = (sigmoid(u_t . h) - label_t)
    coeffs = _sigmoid(u @ h) - (signs > 0)
    grad_h = coeffs @ u
    grad_out = {}
    for t, c in zip(targets, coeffs):
        grad_out[t] = grad_out.get(t, 0.0) + c * h
    grad_row = grad_h / len(constituent_rows)
    return loss, grad_row, grad_out


class SkipgramEmbeddings(BaseEstimator):
    """Skip-gram-with-negative-sampling trainer for subword embeddings.

    fit() consumes an iterable of documents (strings) and exposes the
    trained model as ``model_`` with per-epoch mean loss in ``loss_history_``.
    """

    def __init__(
        self,
        dim=300,
        window=5,
        negatives=5,
        epochs=5,
        learning_rate=0.05,
        bucket_count=50_000,
        min_n=3,
        max_n=6,
        min_count=1,
        seed=0,
    ):
        self.dim = dim
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.bucket_count = bucket_count
        self.min_n = min_n
        self.max_n = max_n
        self.min_count = min_count
        self.seed = seed

    def _validate(self):
        for name in ("dim", "window", "negatives", "learning_rate", "bucket_count", "min_count"):
            check_positive(getattr(self, name), name)
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")

    def fit(self, docs, y=None):
        self._validate()
        sentences = [tokenize(doc) for doc in docs]
        sentences = [s for s in sentences if s]
        if not sentences:
            raise ValueError("corpus is empty")

        counts = {}
        for sent in sentences:
            for tok in sent:
                counts[tok] = counts.get(tok, 0) + 1
        vocab_words = [w for w, c in sorted(counts.items()) if c >= self.min_count]
        if not vocab_words:
            raise ValueError("no word meets min_count")
        vocab = {w: i for i, w in enumerate(vocab_words)}

        rng = np.random.default_rng(self.seed)
        n_rows = len(vocab) + self.bucket_count
        scale = 0.5 / self.dim
        input_vectors = rng.uniform(-scale, scale, size=(n_rows, self.dim))
        output_vectors = np.zeros((len(vocab), self.dim))

        model = SubwordEmbeddingModel(
            dim=self.dim,
            vocab=vocab,
            input_vectors=input_vectors,
            bucket_count=self.bucket_count,
            min_n=self.min_n,
            max_n=self.max_n,
            trained=self.epochs > 0,
            word_counts={w: counts[w] for w in vocab_words},
        )

        # unigram^0.75 negative-sampling distribution
        freqs = np.array([counts[w] for w in vocab_words], dtype=np.float64) ** 0.75
        neg_cdf = np.cumsum(freqs / freqs.sum())

        row_cache = {w: model.constituent_rows(w) for w in vocab_words}
        encoded = [[vocab[t] for t in sent if t in vocab] for sent in sentences]
        encoded = [s for s in encoded if len(s) >= 2]
        id_to_word = vocab_words

        history = []
        for _epoch in range(self.epochs):
            total_loss = 0.0
            n_examples = 0
            for sent in encoded:
                for pos, center in enumerate(sent):
                    reduced = int(rng.integers(1, self.window + 1))
                    lo = max(0, pos - reduced)
                    hi = min(len(sent), pos + reduced + 1)
                    rows = row_cache[id_to_word[center]]
                    for ctx_pos in range(lo, hi):
                        if ctx_pos == pos:
                            continue
                        ctx = sent[ctx_pos]
                        negs = []
                        while len(negs) < self.negatives:
                            cand = int(np.searchsorted(neg_cdf, rng.random()))
                            if cand != ctx:
                                negs.append(cand)
                        loss, grad_row, grad_out = skipgram_example_loss_grads(
                            input_vectors, output_vectors, rows, ctx, negs
                        )
                        total_loss += loss
                        n_examples += 1
                        for t, g in grad_out.items():
                            output_vectors[t] -= self.learning_rate * g
                        input_vectors[rows] -= self.learning_rate * grad_row
            history.append(total_loss / max(1, n_examples))

        self.model_ = model
        self.output_vectors_ = output_vectors
        self.loss_history_ = history
        return self

    def transform(self, words):
        """Vectors for a list of tokens, stacked row-wise."""
        return np.stack([word_vector(self.model_, w) for w in words])


def train_skipgram(
    corpus,
    dim=300,
    window=5,
    negatives=5,
    epochs=5,
    learning_rate=0.05,
    bucket_count=50_000,
    seed=0,
    **kwargs,
):
    """Train a SubwordEmbeddingModel; returns (model, per-epoch loss history)."""
    est = SkipgramEmbeddings(
        dim=dim,
        window=window,
        negatives=negatives,
        epochs=epochs,
        learning_rate=learning_rate,
        bucket_count=bucket_count,
        seed=seed,
        **kwargs,
    ).fit(corpus)
    return est.model_, est.loss_history_


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(model, path):
    """Versioned binary: magic, version, JSON header, vector bytes, checksum."""
    header = json.dumps(
        {
            "dim": model.dim,
            "min_n": model.min_n,
            "max_n": model.max_n,
            "bucket_count": model.bucket_count,
            "trained": model.trained,
            "vocab": sorted(model.vocab, key=model.vocab.get),
            "word_counts": model.word_counts,
        }
    ).encode("utf-8")
    body = np.ascontiguousarray(model.input_vectors, dtype=np.float64).tobytes()
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(struct.pack("<I", _VERSION))
    buf.write(struct.pack("<Q", len(header)))
    buf.write(header)
    buf.write(struct.pack("<Q", len(body)))
    buf.write(body)
    payload = buf.getvalue()
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(digest)
    return path


def load_model(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(_MAGIC) + 4 + 32:
        raise ModelPersistenceError("file truncated")
    payload, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise ModelPersistenceError("checksum mismatch: file corrupt or truncated")
    buf = io.BytesIO(payload)
    if buf.read(4) != _MAGIC:
        raise ModelPersistenceError("not an embedding model file")
    (version,) = struct.unpack("<I", buf.read(4))
    if version != _VERSION:
        raise ModelPersistenceError(f"unsupported model version {version}")
    (hlen,) = struct.unpack("<Q", buf.read(8))
    header = json.loads(buf.read(hlen).decode("utf-8"))
    (blen,) = struct.unpack("<Q", buf.read(8))
    body = buf.read(blen)
    if len(body) != blen:
        raise ModelPersistenceError("file truncated")
    n_rows = len(header["vocab"]) + header["bucket_count"]
    vectors = np.frombuffer(body, dtype=np.float64).reshape(n_rows, header["dim"]).copy()
    return SubwordEmbeddingModel(
        dim=header["dim"],
        vocab={w: i for i, w in enumerate(header["vocab"])},
        input_vectors=vectors,
        bucket_count=header["bucket_count"],
        min_n=header["min_n"],
        max_n=header["max_n"],
        trained=header["trained"],
        word_counts=header.get("word_counts", {}),
    )


def load_text_vectors(path, bucket_count=1):
    """Import the text format: header `vocab_count dim`, then one word per line.

    Bucket rows are zero-filled, so out-of-vocabulary words resolve to the
    zero vector and in-vocab vectors keep their direction but shrink in norm
    (cosine-based consumers are unaffected).
    """
    with open(path, "r", encoding="utf-8") as fh:
        head = fh.readline().split()
        if len(head) != 2:
            raise ModelPersistenceError("text header must be 'vocab_count dim'")
        count, dim = int(head[0]), int(head[1])
        vocab = {}
        rows = []
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ModelPersistenceError(f"line {lineno}: expected {dim + 1} fields")
            vocab[parts[0]] = len(rows)
            rows.append([float(x) for x in parts[1:]])
        if len(rows) != count:
            raise ModelPersistenceError(f"header declared {count} words, found {len(rows)}")
    vectors = np.zeros((len(rows) + bucket_count, dim))
    if rows:
        vectors[: len(rows)] = np.array(rows)
    return SubwordEmbeddingModel(
        dim=dim, vocab=vocab, input_vectors=vectors, bucket_count=bucket_count
    )
