"""Feature extraction, TF-IDF, and similarity-matrix properties."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dppsum import (
    ConfigurationError,
    InvalidSimilarityError,
    SentenceRecord,
    apply_zscore,
    concat_features,
    fit_tfidf,
    fit_zscore,
    fuse_similarity,
    pairwise_cosine_matrix,
    psd_repair,
    surface_features,
    tfidf_cosine,
    tokenize,
    validate_similarity,
)

from oracles import random_similarity


class TestTokenize:
    def test_empty_text(self):
        assert tokenize("") == []

    def test_lowercases_and_splits_on_punctuation(self):
        assert tokenize("The cat, the CAT.") == ["the", "cat", "the", "cat"]

    def test_keeps_digits(self):
        assert tokenize("Report 2021: 45% growth!") == ["report", "2021", "45", "growth"]

    def test_deterministic(self):
        text = "Mixed CASE text, with 3 tokens?"
        assert tokenize(text) == tokenize(text)


class TestTfidf:
    def test_single_document_idf_is_one(self):
        model = fit_tfidf([["cat", "sat", "cat"]])
        # ln(2/2) + 1 = 1 for every present term
        assert_allclose(model.idf, 1.0)

    def test_idf_formula_on_three_documents(self):
        model = fit_tfidf([["shared", "rare"], ["shared"], ["shared"]])
        shared = model.idf[model.vocabulary["shared"]]
        rare = model.idf[model.vocabulary["rare"]]
        assert_allclose(shared, math.log(4 / 4) + 1)
        assert_allclose(rare, math.log(4 / 2) + 1)

    def test_matches_independent_recomputation(self):
        """Re-derive tf-idf cosines with plain dicts, no shared code."""
        docs = [
            tokenize("the cat sat on the mat"),
            tokenize("the dog sat"),
            tokenize("a cat and a dog"),
        ]
        model = fit_tfidf(docs)

        df = {}
        for doc in docs:
            for term in set(doc):
                df[term] = df.get(term, 0) + 1
        idf = {t: math.log((1 + len(docs)) / (1 + df[t])) + 1 for t in df}

        def weights(tokens):
            w = {}
            for t in tokens:
                if t in idf:
                    w[t] = w.get(t, 0.0) + idf[t]
            norm = math.sqrt(sum(x * x for x in w.values()))
            return {t: x / norm for t, x in w.items()} if norm else {}

        for a, b in [(docs[0], docs[1]), (docs[1], docs[2]), (["cat", "mat"], docs[0])]:
            wa, wb = weights(a), weights(b)
            expected = sum(wa[t] * wb.get(t, 0.0) for t in wa)
            assert_allclose(tfidf_cosine(a, b, model), expected, rtol=1e-12)

    def test_identical_token_lists_cosine_one(self):
        model = fit_tfidf([["cat", "sat"], ["dog", "ran"]])
        assert tfidf_cosine(["cat", "sat"], ["cat", "sat"], model) == pytest.approx(1.0)

    def test_disjoint_vocabulary_cosine_zero(self):
        model = fit_tfidf([["cat", "sat"], ["dog", "ran"]])
        assert tfidf_cosine(["cat"], ["dog"], model) == 0.0

    def test_hand_worked_cosine(self):
        # corpus {cat sat}, {cat ran}: idf(cat)=1, idf(sat)=idf(ran)=1+ln(1.5)
        # both vectors have norm sqrt(1 + w^2), overlap only on cat,
        # so cos = 1 / (1 + w^2) with w = 1 + ln(1.5)
        model = fit_tfidf([["cat", "sat"], ["cat", "ran"]])
        w = 1 + math.log(1.5)
        expected = 1.0 / (1.0 + w * w)
        assert_allclose(
            tfidf_cosine(["cat", "sat"], ["cat", "ran"], model), expected, rtol=1e-10
        )

    def test_out_of_vocabulary_ignored(self):
        model = fit_tfidf([["cat"]])
        assert tfidf_cosine(["cat", "unseen"], ["cat"], model) == pytest.approx(1.0)

    def test_requires_documents(self):
        with pytest.raises(ConfigurationError):
            fit_tfidf([])


class TestSurfaceFeatures:
    def test_sentence_equal_to_document(self):
        text = "ten different tokens fill this one sentence for the test"
        doc_tokens = tokenize(text)
        assert len(doc_tokens) == 10
        record = SentenceRecord.from_text(text, "d0", 1)
        model = fit_tfidf([doc_tokens])
        v = surface_features(record, doc_tokens, model).v
        assert_allclose(v, [10.0, 1.0, 1.0])

    def test_out_of_vocabulary_sentence_gets_zero_cosine(self):
        doc_tokens = tokenize("actual document content here")
        model = fit_tfidf([doc_tokens])
        record = SentenceRecord.from_text("unrelated words entirely", "d0", 3)
        v = surface_features(record, doc_tokens, model).v
        assert_allclose(v, [3.0, 3.0, 0.0])

    def test_position_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            SentenceRecord.from_text("text", "d0", 0)

    def test_word_count_matches_tokenizer(self):
        record = SentenceRecord.from_text("The cat, the CAT.", "d0", 2)
        assert record.word_count == 4


class TestZScore:
    def test_training_split_standardized(self):
        rng = np.random.default_rng(11)
        rows = rng.normal(size=(40, 3)) * [2.0, 5.0, 0.3] + [1.0, -4.0, 0.5]
        mean, std = fit_zscore(rows)
        scored = apply_zscore(rows, mean, std)
        assert_allclose(scored.mean(axis=0), 0.0, atol=1e-9)
        assert_allclose(scored.std(axis=0), 1.0, atol=1e-9)

    def test_constant_dimension_maps_to_zero(self):
        rows = np.array([[1.0, 2.0], [1.0, 4.0], [1.0, 6.0]])
        mean, std = fit_zscore(rows)
        scored = apply_zscore(rows, mean, std)
        assert_allclose(scored[:, 0], 0.0)
        assert_allclose(scored[:, 1].std(), 1.0)


class TestConcatFeatures:
    def test_combined_layout(self):
        u = np.array([0.1, 0.2])
        v = np.array([1.0, -1.0, 0.0])
        assert_allclose(concat_features(u, v, "combined"), [0.1, 0.2, 1.0, -1.0, 0.0])

    def test_embeddings_mode_returns_u(self):
        u = np.array([0.5, 0.25, 0.125])
        assert_allclose(concat_features(u, np.zeros(3), "embeddings"), u)

    def test_surface_mode_ignores_u(self):
        v = np.array([1.0, 2.0, 3.0])
        assert_allclose(concat_features(None, v, "surface"), v)

    def test_slicing_recovers_parts(self):
        u = np.array([0.3, 0.6])
        v = np.array([2.0, 0.0, -1.0])
        combined = concat_features(u, v, "combined")
        assert (combined[:2] == u).all() and (combined[2:] == v).all()

    def test_missing_embedding_rejected(self):
        with pytest.raises(ConfigurationError):
            concat_features(None, np.zeros(3), "combined")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ConfigurationError):
            concat_features(np.zeros(2), np.zeros(3), "bert")


class TestPairwiseCosine:
    def test_single_sentence(self):
        model = fit_tfidf([["cat"]])
        assert_allclose(pairwise_cosine_matrix([["cat"]], model), [[1.0]])

    def test_identical_sentences_fully_similar(self):
        tokens = ["cat", "sat"]
        model = fit_tfidf([tokens])
        assert_allclose(pairwise_cosine_matrix([tokens, tokens], model), 1.0)

    def test_zero_vector_sentence_isolated(self):
        model = fit_tfidf([["cat", "sat"]])
        c = pairwise_cosine_matrix([["cat"], ["unseen"]], model)
        assert c[0, 1] == 0.0 and c[1, 1] == 1.0

    def test_random_fixture_is_psd(self):
        rng = np.random.default_rng(3)
        vocab = [f"w{i}" for i in range(12)]
        for _ in range(20):
            sentences = [
                [vocab[j] for j in rng.integers(0, 12, size=rng.integers(1, 7))]
                for _ in range(8)
            ]
            model = fit_tfidf(sentences)
            c = pairwise_cosine_matrix(sentences, model)
            assert np.linalg.eigvalsh(c)[0] >= -1e-10
            assert_allclose(c, c.T)


class TestPsdRepair:
    def test_identity_unchanged(self):
        assert_allclose(psd_repair(np.eye(4)), np.eye(4))

    def test_indefinite_matrix_projected(self):
        s = np.array([[1.0, 1.2], [1.2, 1.0]])
        out = psd_repair(s)
        assert np.linalg.eigvalsh(out)[0] >= -1e-8
        assert_allclose(np.diagonal(out), 1.0)
        assert out.max() <= 1.0

    def test_gram_matrix_passes_through(self):
        rng = np.random.default_rng(5)
        s = random_similarity(rng, 6)
        assert_allclose(psd_repair(s), s, atol=1e-9)

    def test_asymmetric_input_rejected(self):
        with pytest.raises(InvalidSimilarityError):
            psd_repair(np.array([[1.0, 0.5], [0.1, 1.0]]))

    def test_output_is_psd_on_random_perturbations(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            s = random_similarity(rng, 7)
            noise = rng.normal(scale=0.3, size=s.shape)
            noisy = np.clip(s + (noise + noise.T) / 2, 0.0, 1.0)
            np.fill_diagonal(noisy, 1.0)
            out = psd_repair(noisy)
            assert np.linalg.eigvalsh(out)[0] >= -1e-8
            assert_allclose(np.diagonal(out), 1.0)
            assert out.min() >= 0.0 and out.max() <= 1.0


class TestFuseSimilarity:
    def test_point_nine_blend_before_repair(self):
        # all-ones learned similarity vs identity cosine: the blend is PSD,
        # so fusing must reproduce 0.9*S + 0.1*C exactly off the diagonal
        s = np.ones((3, 3))
        c = np.eye(3)
        fused = fuse_similarity(s, c, 0.9)
        off = ~np.eye(3, dtype=bool)
        assert_allclose(fused[off], 0.9, atol=1e-12)
        assert_allclose(np.diagonal(fused), 1.0)

    def test_alpha_one_keeps_learned(self):
        rng = np.random.default_rng(2)
        s = random_similarity(rng, 5)
        assert_allclose(fuse_similarity(s, np.eye(5), 1.0), s, atol=1e-9)

    def test_alpha_zero_keeps_cosine(self):
        rng = np.random.default_rng(4)
        c = random_similarity(rng, 5)
        assert_allclose(fuse_similarity(np.ones((5, 5)), c, 0.0), c, atol=1e-10)

    def test_monotone_in_alpha_before_repair(self):
        rng = np.random.default_rng(6)
        s = random_similarity(rng, 4)
        c = random_similarity(rng, 4)
        grid = [0.0, 0.25, 0.5, 0.75, 1.0]
        blends = [a * s + (1 - a) * c for a in grid]
        deltas = np.sign(s - c)
        for lo, hi in zip(blends, blends[1:]):
            assert np.all((hi - lo) * deltas >= -1e-12)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidSimilarityError):
            fuse_similarity(np.eye(3), np.eye(4), 0.5)

    def test_alpha_out_of_range_rejected(self):
        with pytest.raises(ConfigurationError):
            fuse_similarity(np.eye(2), np.eye(2), 1.5)


class TestValidateSimilarity:
    def test_accepts_valid_matrix(self):
        rng = np.random.default_rng(8)
        s = random_similarity(rng, 6)
        validate_similarity(s)

    def test_rejects_bad_diagonal(self):
        s = np.eye(3) * 0.5
        with pytest.raises(InvalidSimilarityError):
            validate_similarity(s)

    def test_rejects_out_of_range_entries(self):
        s = np.eye(2)
        s[0, 1] = s[1, 0] = 1.5
        with pytest.raises(InvalidSimilarityError):
            validate_similarity(s)
