"""CNN classifier: tokenization, forward math, training, gradients, persistence."""

import math
import random

import numpy as np
import pytest

from privacylens.embeddings import SubwordEmbeddingModel
from privacylens.errors import ModelPersistenceError, NotTrainedError
from privacylens.metrics import ConfusionCounts, macro_prf
from privacylens.neuralnet import (
    CnnTextClassifier,
    TokenSequence,
    gradient_check,
    load_classifier,
    multilabel_loss,
    save_classifier,
    tokenize,
)


def embedding_fixture(words, dim=8, seed=0, bucket_count=128):
    rng = np.random.default_rng(seed)
    vocab = {w: i for i, w in enumerate(words)}
    vectors = rng.normal(scale=0.5, size=(len(words) + bucket_count, dim))
    return SubwordEmbeddingModel(
        dim=dim, vocab=vocab, input_vectors=vectors, bucket_count=bucket_count
    )


def tiny_classifier(dim=6, labels=("l1", "l2"), seed=0, **kw):
    words = [f"w{i}" for i in range(12)]
    embm = embedding_fixture(words, dim=dim, seed=seed)
    defaults = dict(
        embedding_model=embm,
        label_ids=labels,
        filter_count=3,
        filter_size=2,
        dense_size=4,
        max_len=6,
        batch_size=4,
        epochs=3,
        seed=seed,
    )
    defaults.update(kw)
    clf = CnnTextClassifier(**defaults)
    clf.init_weights()
    return clf, words


class TestTokenize:
    def test_contraction_and_punctuation(self):
        assert tokenize("We don't sell data.") == ["we", "do", "n't", "sell", "data", "."]

    def test_empty(self):
        assert tokenize("") == []

    def test_idempotent_on_rejoined_output(self):
        text = "You can't opt-out; we (sometimes) share it's data!"
        toks = tokenize(text)
        assert tokenize(" ".join(toks)) == toks


class TestTokenSequence:
    def test_pads_to_exact_length(self):
        seq = TokenSequence.from_text("one two", max_len=5)
        assert len(seq.tokens) == 5
        assert seq.tokens[:2] == ("one", "two")
        assert seq.tokens[2:] == ("", "", "")

    def test_truncates(self):
        seq = TokenSequence.from_tokens(list("abcdefgh"), max_len=3)
        assert seq.tokens == ("a", "b", "c")


class TestForward:
    def test_shapes_and_ranges(self):
        clf, words = tiny_classifier()
        probs, sem = clf.forward(" ".join(words[:4]))
        assert set(probs) == {"l1", "l2"}
        assert all(0.0 < p < 1.0 for p in probs.values())
        assert sem.shape == (4,)

    def test_zero_weights_give_half(self):
        clf, words = tiny_classifier()
        for w in clf.weights_.values():
            w[:] = 0.0
        probs, _ = clf.forward(words[0])
        assert all(p == pytest.approx(0.5) for p in probs.values())

    def test_hand_computed_tiny_model(self):
        # dim 4, 2 filters, k=2, dense1 3, 2 labels; expected values were
        # produced by an explicit nested-loop evaluation of the same weights
        # (token vectors L2-normalized, as in _lookup).
        embm = embedding_fixture(["u", "v", "w"], dim=4, bucket_count=16)
        embm.input_vectors[0] = [0.1, 0.2, 0.3, 0.4]
        embm.input_vectors[1] = [0.5, -0.1, 0.0, 0.2]
        embm.input_vectors[2] = [-0.3, 0.4, 0.1, 0.0]
        clf = CnnTextClassifier(
            embedding_model=embm,
            label_ids=("l1", "l2"),
            filter_count=2,
            filter_size=2,
            dense_size=3,
            max_len=3,
        )
        clf.init_weights()
        clf.weights_["conv_W"][:, 0] = [0.1, -0.2, 0.3, 0.0, 0.2, 0.1, -0.1, 0.4]
        clf.weights_["conv_W"][:, 1] = [-0.3, 0.2, 0.0, 0.1, -0.2, 0.3, 0.2, -0.1]
        clf.weights_["conv_b"][:] = [0.05, -0.05]
        clf.weights_["dense1_W"][:] = [[0.2, -0.1, 0.3], [0.4, 0.2, -0.2]]
        clf.weights_["dense1_b"][:] = [0.01, 0.02, 0.03]
        clf.weights_["dense2_W"][:] = [[0.3, -0.2], [-0.1, 0.4], [0.2, 0.1]]
        clf.weights_["dense2_b"][:] = [0.0, 0.1]
        seq = TokenSequence(tokens=("u", "v", "w"), max_len=3)
        probs, sem = clf.forward(seq)
        assert sem == pytest.approx([0.131332522094, 0.0, 0.157301989921], abs=1e-9)
        assert probs["l1"] == pytest.approx(0.517707629867, abs=1e-9)
        assert probs["l2"] == pytest.approx(0.522351017963, abs=1e-9)

    def test_too_short_for_filter_rejected(self):
        embm = embedding_fixture(["a"], dim=4)
        clf = CnnTextClassifier(
            embedding_model=embm, label_ids=("l",), filter_size=3, max_len=2
        )
        with pytest.raises(ValueError):
            clf.init_weights()

    def test_requires_weights(self):
        embm = embedding_fixture(["a"], dim=4)
        clf = CnnTextClassifier(embedding_model=embm, label_ids=("l",))
        with pytest.raises(NotTrainedError):
            clf.forward("a")

    def test_position_invariance(self):
        clf, words = tiny_classifier(max_len=10)
        trigger = (words[1], words[2])
        outputs = []
        # interior placements, at least k-1 away from both edges
        for start in (1, 3, 5):
            toks = [""] * 10
            toks[start : start + 2] = trigger
            probs, sem = clf.forward(TokenSequence(tokens=tuple(toks), max_len=10))
            outputs.append((tuple(probs.values()), tuple(sem)))
        assert outputs[0] == outputs[1] == outputs[2]

    def test_monotone_sigmoid_in_own_logit(self):
        clf, words = tiny_classifier()
        text = " ".join(words[:3])
        base = clf.predict_proba(text)
        clf.weights_["dense2_b"][0] += 0.7
        bumped = clf.predict_proba(text)
        assert bumped["l1"] > base["l1"]
        assert bumped["l2"] == pytest.approx(base["l2"])


class TestLoss:
    def test_uniform_half_gives_ln2(self):
        probs = {f"l{i}": 0.5 for i in range(5)}
        assert multilabel_loss(probs, {"l0", "l3"}) == pytest.approx(math.log(2), abs=1e-12)
        assert multilabel_loss(probs, set()) == pytest.approx(math.log(2), abs=1e-12)

    def test_perfect_confidence_near_zero(self):
        probs = {"a": 1.0, "b": 0.0}
        assert multilabel_loss(probs, {"a"}) == pytest.approx(0.0, abs=1e-9)

    def test_hand_computed(self):
        probs = {"l1": 0.9, "l2": 0.2}
        expected = -(math.log(0.9) + math.log(0.8)) / 2
        assert multilabel_loss(probs, {"l1"}) == pytest.approx(expected, abs=1e-12)
        assert multilabel_loss(probs, {"l1"}) == pytest.approx(0.1643, abs=1e-4)

    def test_unknown_truth_label_rejected(self):
        with pytest.raises(ValueError):
            multilabel_loss({"a": 0.5}, {"zzz"})


class TestGradients:
    def test_random_tiny_models(self):
        rng = random.Random(0)
        for trial in range(5):
            clf, words = tiny_classifier(seed=trial, dim=5)
            toks = [rng.choice(words) for _ in range(rng.randint(2, 6))]
            truth = {lab for lab in clf.label_ids if rng.random() < 0.5}
            report = gradient_check(clf, (toks, truth))
            assert report["passed"], report

    def test_zero_weight_model_flags_kinks(self):
        clf, words = tiny_classifier()
        for w in clf.weights_.values():
            w[:] = 0.0
        report = gradient_check(clf, (words[:3], {"l1"}))
        assert report["kinks"]  # ReLU kinks reported, not failed

    def test_semantic_gradient_excludes_embeddings(self):
        clf, words = tiny_classifier()
        report = gradient_check(clf, (words[:3], {"l1"}))
        assert set(report["groups"]) == set(clf.weights_)


def keyword_dataset(words, n, seed, n_fillers=6, length=8):
    """Synthetic separable corpus: keyword presence determines each label."""
    rng = random.Random(seed)
    X, y = [], []
    fillers = words[4 : 4 + n_fillers]
    for _ in range(n):
        toks = [rng.choice(fillers) for _ in range(length)]
        labels = set()
        if rng.random() < 0.5:
            for _ in range(2):
                toks[rng.randrange(len(toks))] = words[0]
            labels.add("lab-a")
        if rng.random() < 0.5:
            pos = rng.randrange(len(toks))
            while toks[pos] == words[0]:
                pos = rng.randrange(len(toks))
            toks[pos] = words[1]
            labels.add("lab-b")
        X.append(" ".join(toks))
        y.append(labels)
    return X, y


class TestTraining:
    def test_separable_dataset_reaches_high_f1(self):
        words = [f"kw{i}" for i in range(12)]
        embm = embedding_fixture(words, dim=16, seed=3)
        X, y = keyword_dataset(words, 250, seed=1)
        clf = CnnTextClassifier(
            embedding_model=embm,
            label_ids=("lab-a", "lab-b"),
            filter_count=8,
            filter_size=3,
            dense_size=16,
            max_len=12,
            epochs=30,
            learning_rate=2e-2,
            batch_size=20,
            seed=0,
        )
        clf.fit(X[:200], y[:200])
        preds = clf.predict(X[200:])
        cc = ConfusionCounts.from_predictions(["lab-a", "lab-b"], preds, y[200:])
        assert macro_prf(cc)["macro"]["f1"] >= 0.95

    def test_epochs_zero_leaves_weights_unchanged(self):
        clf, words = tiny_classifier(epochs=0)
        before = {k: v.copy() for k, v in clf.weights_.items()}
        clf.fit([words[0]], [{"l1"}])
        for k in before:
            assert np.array_equal(before[k], clf.weights_[k])

    def test_embeddings_frozen_through_training(self):
        clf, words = tiny_classifier(epochs=4)
        fp_before = clf.embedding_model.fingerprint()
        X = [" ".join(words[:3]), " ".join(words[3:6]), words[0], words[5]]
        y = [{"l1"}, {"l2"}, {"l1"}, set()]
        clf.fit(X, y)
        assert clf.embedding_model.fingerprint() == fp_before

    def test_unknown_label_rejected_before_training(self):
        clf, words = tiny_classifier()
        before = {k: v.copy() for k, v in clf.weights_.items()}
        with pytest.raises(ValueError):
            clf.fit([words[0]], [{"nope"}])
        for k in before:
            assert np.array_equal(before[k], clf.weights_[k])

    def test_training_determinism(self):
        words = [f"w{i}" for i in range(10)]
        embm = embedding_fixture(words, dim=6, seed=9)
        X, y = keyword_dataset(words, 40, seed=5)

        def run():
            clf = CnnTextClassifier(
                embedding_model=embm,
                label_ids=("lab-a", "lab-b"),
                filter_count=4,
                filter_size=2,
                dense_size=5,
                max_len=8,
                epochs=3,
                seed=77,
            )
            clf.fit(X, y)
            return clf

        c1, c2 = run(), run()
        for k in c1.weights_:
            assert np.array_equal(c1.weights_[k], c2.weights_[k])
        assert c1.loss_history_ == c2.loss_history_

    def test_loss_history_recorded(self):
        clf, words = tiny_classifier(epochs=5)
        X = [words[0], words[1], " ".join(words[2:5])]
        y = [{"l1"}, {"l2"}, {"l1", "l2"}]
        clf.fit(X, y)
        assert len(clf.loss_history_) == 5


class TestPersistence:
    def test_round_trip(self, tmp_path):
        clf, words = tiny_classifier(epochs=2)
        clf.fit([words[0], words[1]], [{"l1"}, {"l2"}])
        path = tmp_path / "clf.bin"
        save_classifier(clf, path)
        loaded = load_classifier(path, clf.embedding_model)
        text = " ".join(words[:4])
        p1, s1 = clf.forward(text)
        p2, s2 = loaded.forward(text)
        assert p1 == p2
        assert np.array_equal(s1, s2)

    def test_fingerprint_mismatch_refused(self, tmp_path):
        clf, words = tiny_classifier()
        path = tmp_path / "clf.bin"
        save_classifier(clf, path)
        other = embedding_fixture(["different"], dim=6, seed=123)
        with pytest.raises(ModelPersistenceError, match="embedding"):
            load_classifier(path, other)

    def test_corruption_detected(self, tmp_path):
        clf, _ = tiny_classifier()
        path = tmp_path / "clf.bin"
        save_classifier(clf, path)
        blob = bytearray(path.read_bytes())
        blob[60] ^= 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelPersistenceError):
            load_classifier(path, clf.embedding_model)
