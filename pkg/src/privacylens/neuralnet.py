"""Multi-label CNN text classifier, implemented from scratch on numpy.

Architecture: frozen embedding lookup -> single-width convolution + ReLU ->
max-pool over positions -> dense + ReLU (the "semantic vector") -> dense ->
sigmoid per label. Training minimizes mean binary cross-entropy over labels
with Adam. Backpropagation is hand-written and validated against central
finite differences by :func:`gradient_check`.
"""

import hashlib
import io
import json
import struct
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from . import embeddings as emb
from .errors import ModelPersistenceError, NotTrainedError
from .text import tokenize

__all__ = [
    "tokenize",
    "TokenSequence",
    "CnnTextClassifier",
    "multilabel_loss",
    "gradient_check",
    "save_classifier",
    "load_classifier",
]

_MAGIC = b"PLCN"
_VERSION = 1
_EPS = 1e-12


@dataclass(frozen=True)
class TokenSequence:
    """A token list fixed to exactly max_len entries (padded or truncated)."""

    tokens: tuple
    max_len: int

    @classmethod
    def from_text(cls, text, max_len):
        return cls.from_tokens(tokenize(text), max_len)

    @classmethod
    def from_tokens(cls, tokens, max_len):
        tokens = list(tokens)[:max_len]
        padded = tuple(tokens) + ("",) * (max_len - len(tokens))
        return cls(tokens=padded, max_len=max_len)

    def __post_init__(self):
        if len(self.tokens) != self.max_len:
            raise ValueError("token count must equal max_len after padding")


def multilabel_loss(probs, truth):
    """Mean over labels of binary cross-entropy; probs is a label->p map.

    Probabilities are clamped to [1e-12, 1 - 1e-12] before the logs.
    """
    unknown = set(truth) - set(probs)
    if unknown:
        raise ValueError(f"truth labels outside the model: {sorted(unknown)}")
    total = 0.0
    for label, p in probs.items():
        p = min(max(p, _EPS), 1.0 - _EPS)
        y = 1.0 if label in truth else 0.0
        total += -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return total / len(probs)


class CnnTextClassifier(BaseEstimator):
    """Sigmoid-output CNN over frozen word vectors.

    Parameters mirror the deployed configuration: 200 filters of width 3,
    a 100-unit dense layer, batches of 40, Adam(1e-3, 0.9, 0.999).
    """

    def __init__(
        self,
        embedding_model=None,
        label_ids=(),
        filter_count=200,
        filter_size=3,
        dense_size=100,
        max_len=300,
        batch_size=40,
        learning_rate=1e-3,
        beta1=0.9,
        beta2=0.999,
        epochs=10,
        seed=0,
    ):
        self.embedding_model = embedding_model
        self.label_ids = label_ids
        self.filter_count = filter_count
        self.filter_size = filter_size
        self.dense_size = dense_size
        self.max_len = max_len
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epochs = epochs
        self.seed = seed

    # -- weights --------------------------------------------------------------

    @property
    def is_initialized(self):
        return hasattr(self, "weights_")

    def init_weights(self, rng=None):
        """Glorot-uniform init; also resets the Adam state."""
        if self.embedding_model is None:
            raise ValueError("embedding_model is required")
        if not self.label_ids:
            raise ValueError("label_ids must be non-empty")
        if self.max_len < self.filter_size:
            raise ValueError("max_len must be >= filter_size")
        rng = rng or np.random.default_rng(self.seed)
        dim = self.embedding_model.dim
        k, f, d1, nl = self.filter_size, self.filter_count, self.dense_size, len(self.label_ids)

        def glorot(shape):
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            return rng.uniform(-bound, bound, size=shape)

        self.weights_ = {
            "conv_W": glorot((k * dim, f)),
            "conv_b": np.zeros(f),
            "dense1_W": glorot((f, d1)),
            "dense1_b": np.zeros(d1),
            "dense2_W": glorot((d1, nl)),
            "dense2_b": np.zeros(nl),
        }
        self._adam_m = {k_: np.zeros_like(v) for k_, v in self.weights_.items()}
        self._adam_v = {k_: np.zeros_like(v) for k_, v in self.weights_.items()}
        self._adam_t = 0
        self.loss_history_ = []
        self._vector_cache = {}
        return self

    def _require_weights(self):
        if not self.is_initialized:
            raise NotTrainedError("classifier has no weights; call fit() or init_weights()")

    def _lookup(self, seq):
        """(max_len, dim) matrix of L2-normalized word vectors.

        Padding tokens map to the zero vector. Normalization makes the
        classifier insensitive to the embedding model's overall scale.
        """
        cache = getattr(self, "_vector_cache", None)
        if cache is None:
            cache = self._vector_cache = {}
        dim = self.embedding_model.dim
        X = np.zeros((seq.max_len, dim))
        for i, tok in enumerate(seq.tokens):
            if not tok:
                continue
            vec = cache.get(tok)
            if vec is None:
                vec = emb.word_vector(self.embedding_model, tok)
                norm = np.linalg.norm(vec)
                if norm > 0:
                    vec = vec / norm
                cache[tok] = vec
            X[i] = vec
        return X

    def _as_sequence(self, item):
        if isinstance(item, TokenSequence):
            if item.max_len != self.max_len:
                raise ValueError("sequence max_len differs from the model's")
            return item
        if isinstance(item, str):
            return TokenSequence.from_text(item, self.max_len)
        return TokenSequence.from_tokens(item, self.max_len)

    # -- forward / backward ----------------------------------------------------

    def _forward_arrays(self, X):
        k = self.filter_size
        P = X.shape[0] - k + 1
        windows = np.lib.stride_tricks.sliding_window_view(X, (k, X.shape[1]))[:, 0]
        windows = windows.reshape(P, k * X.shape[1])
        conv_pre = windows @ self.weights_["conv_W"] + self.weights_["conv_b"]
        conv = np.maximum(conv_pre, 0.0)
        argmax = conv.argmax(axis=0)
        pooled = conv[argmax, np.arange(conv.shape[1])]
        d1_pre = pooled @ self.weights_["dense1_W"] + self.weights_["dense1_b"]
        d1 = np.maximum(d1_pre, 0.0)
        logits = d1 @ self.weights_["dense2_W"] + self.weights_["dense2_b"]
        probs = 1.0 / (1.0 + np.exp(-logits))
        probs = np.clip(probs, _EPS, 1.0 - _EPS)
        return {
            "windows": windows,
            "conv_pre": conv_pre,
            "argmax": argmax,
            "pooled": pooled,
            "d1_pre": d1_pre,
            "d1": d1,
            "logits": logits,
            "probs": probs,
        }

    def forward(self, seq):
        """(label probabilities, semantic vector) for one input.

        The semantic vector is the ReLU output of the first dense layer,
        i.e. what feeds the final layer.
        """
        self._require_weights()
        seq = self._as_sequence(seq)
        acts = self._forward_arrays(self._lookup(seq))
        probs = dict(zip(self.label_ids, acts["probs"]))
        return probs, acts["d1"].copy()

    def _backward_arrays(self, acts, y):
        nl = len(self.label_ids)
        dlogits = (acts["probs"] - y) / nl
        grads = {
            "dense2_W": np.outer(acts["d1"], dlogits),
            "dense2_b": dlogits,
        }
        dd1 = self.weights_["dense2_W"] @ dlogits
        dd1_pre = dd1 * (acts["d1_pre"] > 0)
        grads["dense1_W"] = np.outer(acts["pooled"], dd1_pre)
        grads["dense1_b"] = dd1_pre
        dpooled = self.weights_["dense1_W"] @ dd1_pre
        dconv = np.zeros_like(acts["conv_pre"])
        cols = np.arange(dconv.shape[1])
        dconv[acts["argmax"], cols] = dpooled
        dconv *= acts["conv_pre"] > 0
        grads["conv_W"] = acts["windows"].T @ dconv
        grads["conv_b"] = dconv.sum(axis=0)
        return grads

    def example_loss_and_grads(self, seq, truth):
        """Loss and full analytic gradient for one (sequence, label set) pair."""
        self._require_weights()
        seq = self._as_sequence(seq)
        acts = self._forward_arrays(self._lookup(seq))
        y = np.array([1.0 if lab in truth else 0.0 for lab in self.label_ids])
        p = acts["probs"]
        loss = float(np.mean(-(y * np.log(p) + (1 - y) * np.log(1 - p))))
        return loss, self._backward_arrays(acts, y)

    # -- training ---------------------------------------------------------------

    def fit(self, X, y):
        """Train on parallel lists of texts/sequences and label sets."""
        label_set = set(self.label_ids)
        for truth in y:
            bad = set(truth) - label_set
            if bad:
                raise ValueError(f"dataset labels outside the model: {sorted(bad)}")
        if len(X) != len(y):
            raise ValueError("X and y differ in length")
        if not X:
            raise ValueError("dataset is empty")

        rng = np.random.default_rng(self.seed)
        if not self.is_initialized:
            self.init_weights(rng)
        seqs = [self._as_sequence(item) for item in X]
        targets = [
            np.array([1.0 if lab in truth else 0.0 for lab in self.label_ids]) for truth in y
        ]

        for _epoch in range(self.epochs):
            order = rng.permutation(len(seqs))
            epoch_loss = 0.0
            for start in range(0, len(order), self.batch_size):
                batch = order[start : start + self.batch_size]
                grads = {k_: np.zeros_like(v) for k_, v in self.weights_.items()}
                for idx in batch:
                    acts = self._forward_arrays(self._lookup(seqs[idx]))
                    yv = targets[idx]
                    p = acts["probs"]
                    epoch_loss += float(np.mean(-(yv * np.log(p) + (1 - yv) * np.log(1 - p))))
                    for k_, g in self._backward_arrays(acts, yv).items():
                        grads[k_] += g
                self._adam_step(grads, len(batch))
            self.loss_history_.append(epoch_loss / len(seqs))
        return self

    def _adam_step(self, grad_sums, batch_len):
        self._adam_t += 1
        t = self._adam_t
        for k_, w in self.weights_.items():
            g = grad_sums[k_] / batch_len
            self._adam_m[k_] = self.beta1 * self._adam_m[k_] + (1 - self.beta1) * g
            self._adam_v[k_] = self.beta2 * self._adam_v[k_] + (1 - self.beta2) * g * g
            m_hat = self._adam_m[k_] / (1 - self.beta1**t)
            v_hat = self._adam_v[k_] / (1 - self.beta2**t)
            w -= self.learning_rate * m_hat / (np.sqrt(v_hat) + 1e-8)

    # -- prediction ---------------------------------------------------------------

    def predict_proba(self, X):
        """Label->probability maps for a list of inputs (or one input)."""
        single = isinstance(X, (str, TokenSequence))
        items = [X] if single else list(X)
        out = [self.forward(item)[0] for item in items]
        return out[0] if single else out

    def predict(self, X, threshold=0.5):
        single = isinstance(X, (str, TokenSequence))
        probs = self.predict_proba(X)
        if single:
            return {lab for lab, p in probs.items() if p > threshold}
        return [{lab for lab, p in pr.items() if p > threshold} for pr in probs]

    def semantic_vector(self, item):
        return self.forward(item)[1]

    def parameter_count(self):
        self._require_weights()
        return sum(v.size for v in self.weights_.values())


def gradient_check(model, example, tolerance=1e-4, h=1e-4):
    """Compare analytic gradients against central finite differences.

    ``example`` is a (sequence-or-text, truth label set) pair. Every trainable
    parameter is perturbed by ±h; frozen embeddings are not parameters and are
    excluded by construction. Parameters whose perturbation flips a ReLU
    activation sign or the pooling argmax are reported as non-differentiable
    points rather than failures.

    Returns a dict with per-parameter-group max relative error, the overall
    max, the kink list, and a boolean ``passed``.
    """
    seq, truth = example
    seq = model._as_sequence(seq)
    X = model._lookup(seq)
    y = np.array([1.0 if lab in truth else 0.0 for lab in model.label_ids])

    def loss_only():
        acts = model._forward_arrays(X)
        p = acts["probs"]
        return float(np.mean(-(y * np.log(p) + (1 - y) * np.log(1 - p)))), acts

    _, base_acts = loss_only()
    analytic = model._backward_arrays(base_acts, y)

    def kink_signature(acts):
        return (
            (acts["conv_pre"] > 0).tobytes(),
            acts["argmax"].tobytes(),
            (acts["d1_pre"] > 0).tobytes(),
        )

    report = {"groups": {}, "kinks": [], "max_rel_error": 0.0}
    for name, w in model.weights_.items():
        flat = w.ravel()
        grad_flat = analytic[name].ravel()
        group_max = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            loss_up, acts_up = loss_only()
            flat[i] = orig - h
            loss_dn, acts_dn = loss_only()
            flat[i] = orig
            if kink_signature(acts_up) != kink_signature(acts_dn):
                report["kinks"].append((name, i))
                continue
            fd = (loss_up - loss_dn) / (2 * h)
            denom = max(abs(fd), abs(grad_flat[i]), 1e-8)
            group_max = max(group_max, abs(fd - grad_flat[i]) / denom)
        report["groups"][name] = group_max
        report["max_rel_error"] = max(report["max_rel_error"], group_max)
    report["passed"] = report["max_rel_error"] < tolerance
    return report


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_classifier(model, path):
    """Versioned binary with hyperparameters, labels, weights, and the
    fingerprint of the embedding model the weights were trained against."""
    model._require_weights()
    names = sorted(model.weights_)
    header = json.dumps(
        {
            "label_ids": list(model.label_ids),
            "filter_count": model.filter_count,
            "filter_size": model.filter_size,
            "dense_size": model.dense_size,
            "max_len": model.max_len,
            "batch_size": model.batch_size,
            "learning_rate": model.learning_rate,
            "beta1": model.beta1,
            "beta2": model.beta2,
            "epochs": model.epochs,
            "seed": model.seed,
            "embedding_fingerprint": model.embedding_model.fingerprint(),
            "arrays": [[n, list(model.weights_[n].shape)] for n in names],
        }
    ).encode("utf-8")
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(struct.pack("<I", _VERSION))
    buf.write(struct.pack("<Q", len(header)))
    buf.write(header)
    for n in names:
        buf.write(np.ascontiguousarray(model.weights_[n], dtype=np.float64).tobytes())
    payload = buf.getvalue()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(hashlib.sha256(payload).digest())
    return path


def load_classifier(path, embedding_model):
    """Load a classifier; refuses a file trained against different embeddings."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 40:
        raise ModelPersistenceError("file truncated")
    payload, digest = blob[:-32], blob[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise ModelPersistenceError("checksum mismatch: file corrupt or truncated")
    buf = io.BytesIO(payload)
    if buf.read(4) != _MAGIC:
        raise ModelPersistenceError("not a classifier model file")
    (version,) = struct.unpack("<I", buf.read(4))
    if version != _VERSION:
        raise ModelPersistenceError(f"unsupported classifier version {version}")
    (hlen,) = struct.unpack("<Q", buf.read(8))
    header = json.loads(buf.read(hlen).decode("utf-8"))
    if header["embedding_fingerprint"] != embedding_model.fingerprint():
        raise ModelPersistenceError(
            "classifier was trained against a different embedding model"
        )
    model = CnnTextClassifier(
        embedding_model=embedding_model,
        label_ids=tuple(header["label_ids"]),
        filter_count=header["filter_count"],
        filter_size=header["filter_size"],
        dense_size=header["dense_size"],
        max_len=header["max_len"],
        batch_size=header["batch_size"],
        learning_rate=header["learning_rate"],
        beta1=header["beta1"],
        beta2=header["beta2"],
        epochs=header["epochs"],
        seed=header["seed"],
    )
    model.init_weights()
    for name, shape in header["arrays"]:
        size = int(np.prod(shape)) * 8
        arr = np.frombuffer(buf.read(size), dtype=np.float64).reshape(shape).copy()
        model.weights_[name] = arr
    return model
