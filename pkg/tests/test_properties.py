"""Property-based invariants over the core math."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from privacylens.embeddings import SubwordEmbeddingModel, subword_ngrams, word_vector
from privacylens.metrics import RankedPrediction, hellinger, ndcg_at_k, top_k_score
from privacylens.qa import certainty, confidence, rank_score

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def coord_pairs(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    beta = draw(st.lists(unit, min_size=n, max_size=n))
    alpha = draw(st.lists(unit, min_size=n, max_size=n))
    return np.array(beta), np.array(alpha)


class TestRankScoreProperties:
    @given(coord_pairs(), unit)
    @settings(max_examples=300)
    def test_bounded(self, pair, cer):
        beta, alpha = pair
        if float(beta @ beta) == 0.0:  # subnormal entries can square to zero
            return
        s = rank_score(beta, alpha, cer)
        assert -1e-12 <= s <= 1.0 + 1e-12

    @given(coord_pairs(), st.floats(min_value=0.01, max_value=1.0))
    @settings(max_examples=200)
    def test_alpha_shrink_never_increases(self, pair, lam):
        beta, alpha = pair
        if float(beta @ beta) == 0.0:
            return
        assert rank_score(beta, lam * alpha, 1.0) <= rank_score(beta, alpha, 1.0) + 1e-12

    @given(coord_pairs())
    @settings(max_examples=200)
    def test_dominating_alpha_saturates(self, pair):
        beta, alpha = pair
        if float(beta @ beta) == 0.0:
            return
        dominating = np.maximum(alpha, beta)
        assert rank_score(beta, dominating, 1.0) == np.float64(1.0) or math.isclose(
            rank_score(beta, dominating, 1.0), 1.0, abs_tol=1e-12
        )


class TestCertaintyProperties:
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=12))
    @settings(max_examples=300)
    def test_bounded_and_normalization_invariant(self, probs):
        if sum(probs) <= 1e-300:  # subnormal mass underflows when rescaled
            return
        mapping = {f"c{i}": p for i, p in enumerate(probs)}
        value = certainty(mapping)
        assert -1e-12 <= value <= 1.0 + 1e-12
        scaled = {k: 0.37 * v for k, v in mapping.items()}
        assert math.isclose(certainty(scaled), value, abs_tol=1e-9)


class TestConfidenceProperties:
    @given(unit, unit, unit)
    def test_never_exceeds_score(self, s, cer, frac):
        assert confidence(s, cer, frac) <= s + 1e-12

    @given(unit, unit, unit, unit)
    def test_monotone_in_score(self, s1, s2, cer, frac):
        lo, hi = sorted((s1, s2))
        assert confidence(lo, cer, frac) <= confidence(hi, cer, frac) + 1e-12


@st.composite
def distributions(draw):
    n = draw(st.integers(min_value=2, max_value=8))
    raw = draw(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=n, max_size=n).filter(
            lambda xs: sum(xs) > 1e-6
        )
    )
    total = sum(raw)
    return [x / total for x in raw]


class TestHellingerProperties:
    @given(distributions())
    def test_self_distance_zero(self, p):
        assert hellinger(p, p) == np.float64(0.0) or hellinger(p, p) < 1e-7

    @given(st.data())
    @settings(max_examples=200)
    def test_symmetric_and_triangle(self, data):
        n = data.draw(st.integers(min_value=2, max_value=6))
        def dist():
            raw = data.draw(
                st.lists(
                    st.floats(min_value=0.0, max_value=1.0), min_size=n, max_size=n
                ).filter(lambda xs: sum(xs) > 1e-6)
            )
            total = sum(raw)
            return [x / total for x in raw]
        p, q, r = dist(), dist(), dist()
        assert math.isclose(hellinger(p, q), hellinger(q, p), abs_tol=1e-12)
        assert hellinger(p, r) <= hellinger(p, q) + hellinger(q, r) + 1e-9


@st.composite
def ranked_predictions(draw):
    n = draw(st.integers(min_value=1, max_value=10))
    ranking = draw(st.permutations(list(range(n))))
    relevant = draw(st.sets(st.integers(min_value=0, max_value=n - 1)))
    return RankedPrediction(ranking=tuple(ranking), relevant=frozenset(relevant))


class TestRankingMetricProperties:
    @given(st.lists(ranked_predictions(), min_size=1, max_size=6))
    @settings(max_examples=200)
    def test_top_k_monotone(self, preds):
        scores = [top_k_score(preds, k) for k in range(1, 12)]
        assert all(a <= b + 1e-12 for a, b in zip(scores, scores[1:]))

    @given(ranked_predictions(), st.integers(min_value=1, max_value=12))
    @settings(max_examples=300)
    def test_ndcg_bounded(self, pred, k):
        assert 0.0 <= ndcg_at_k(pred, k) <= 1.0 + 1e-12


class TestSubwordProperties:
    @given(st.text(alphabet="abcdefghij-'", min_size=1, max_size=16))
    @settings(max_examples=300)
    def test_ngrams_cover_bounds(self, word):
        grams = subword_ngrams(word)
        wrapped = f"<{word}>"
        assert all(3 <= len(g) <= 6 for g in grams)
        assert all(g in wrapped for g in grams)

    @given(st.text(alphabet="abcdefghij0123456789", min_size=1, max_size=14))
    @settings(max_examples=300)
    def test_word_vector_total(self, word):
        rng = np.random.default_rng(0)
        model = SubwordEmbeddingModel(
            dim=6, vocab={}, input_vectors=rng.normal(size=(32, 6)), bucket_count=32
        )
        v = word_vector(model, word)
        assert v.shape == (6,)
        assert np.isfinite(v).all()
