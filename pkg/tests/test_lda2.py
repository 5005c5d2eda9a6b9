"""W-topic layer: bias coefficients, conditionals, sampler integrity and exports"""

import numpy as np
import pytest
from scipy.special import gammaln

from themealign.core.lda2 import (
    UNIFORM_G,
    EncodedCorpus,
    WTopicSampler,
    WTopicState,
    check_consistency,
    compute_g,
    export_language_models,
    infer_wtopics,
    run_wtopic_sampler,
    sample_wtopic_conditional,
    token_g,
)
from themealign.errors import CorpusValidationError
from themealign.schemas.model import WTopic, WTopicHyper
from themealign.services.corpus_loader import build_frequency_tables, build_vocabulary


def make_state(corpus, s, g=None, eta=0.5, gamma=0.5):
    vocab = build_vocabulary(corpus)
    encoded = EncodedCorpus.from_corpus(corpus, vocab)
    if g is None:
        g = token_g(encoded, build_frequency_tables(corpus, vocab))
    hyper = WTopicHyper(eta=eta, gamma=gamma, iterations=0, burn_in=0)
    return WTopicState(encoded, hyper, np.asarray(g, dtype=float), np.asarray(s)), hyper


def dirichlet_multinomial(counts, prior):
    counts = np.asarray(counts, dtype=float)
    return (
        gammaln(prior * counts.size) - gammaln(counts.sum() + prior * counts.size)
        + (gammaln(counts + prior) - gammaln(prior)).sum()
    )


def collapsed_log_joint(state):
    """log p(w, s) of the collapsed model, every table rebuilt from s"""
    encoded, eta, gamma = state.encoded, state.hyper.eta, state.hyper.gamma
    W = encoded.vocab.size
    words, s = encoded.words, state.s
    total = dirichlet_multinomial(np.bincount(words[s == WTopic.BACKGROUND], minlength=W), eta)
    total += dirichlet_multinomial(np.bincount(words[s == WTopic.THEME], minlength=W), eta)
    for d in range(encoded.num_docs):
        mine = (s == WTopic.DOCUMENT) & (encoded.token_doc == d)
        total += dirichlet_multinomial(np.bincount(words[mine], minlength=W), eta)
    for t in range(encoded.num_paragraphs):
        total += dirichlet_multinomial(np.bincount(s[encoded.paragraph_slice(t)], minlength=3), gamma)
    return total


class TestComputeG:

    def test_document_concentrated_word(self, city_corpus):
        vocab = build_vocabulary(city_corpus)
        tables = build_frequency_tables(city_corpus, vocab)
        g = compute_g(vocab.index_of("montreal"), "d1", tables)
        np.testing.assert_allclose(g, (0.5 / 1.75, 1.0 / 1.75, 0.25 / 1.75))
        np.testing.assert_allclose(g, (0.2857, 0.5714, 0.1429), atol=1e-4)

    def test_ubiquitous_word(self, city_corpus):
        vocab = build_vocabulary(city_corpus)
        tables = build_frequency_tables(city_corpus, vocab)
        g = compute_g(vocab.index_of("the"), "d2", tables)
        assert g[2] == 0.0
        assert g[0] > g[2]

    def test_unseen_word(self, city_corpus):
        tables = build_frequency_tables(city_corpus)
        assert compute_g(10_000, "d1", tables) == UNIFORM_G
        assert compute_g(-1, "d1", tables) == UNIFORM_G

    def test_vectorized_matches_scalar(self, small_synthetic):
        corpus = small_synthetic.corpus
        vocab = build_vocabulary(corpus)
        tables = build_frequency_tables(corpus, vocab)
        encoded = EncodedCorpus.from_corpus(corpus, vocab)
        g = token_g(encoded, tables)
        np.testing.assert_allclose(g.sum(axis=1), 1.0, atol=1e-12)
        for n in range(0, encoded.num_tokens, 7):
            doc_id = encoded.doc_ids[encoded.token_doc[n]]
            np.testing.assert_allclose(g[n], compute_g(int(encoded.words[n]), doc_id, tables))

    def test_tables_must_cover_documents(self, city_corpus, corpus_factory):
        vocab = build_vocabulary(city_corpus)
        encoded = EncodedCorpus.from_corpus(city_corpus, vocab)
        other = corpus_factory({"elsewhere": [["the"]]})
        with pytest.raises(CorpusValidationError):
            token_g(encoded, build_frequency_tables(other, vocab))


class TestConditional:

    def test_uniform_g_and_zero_counts(self, corpus_factory):
        corpus = corpus_factory({"a": [["x"]]})
        state, hyper = make_state(corpus, [0], g=[UNIFORM_G])
        state.remove(0)
        np.testing.assert_allclose(sample_wtopic_conditional(state, 0, 0, hyper), [1 / 3] * 3)

    def test_count_factors_cancel(self, corpus_factory):
        corpus = corpus_factory({"a": [["x"]]})
        state, hyper = make_state(corpus, [1], g=[(0.9, 0.05, 0.05)])
        state.remove(0)
        np.testing.assert_allclose(
            sample_wtopic_conditional(state, 0, 0, hyper), [0.9, 0.05, 0.05]
        )

    def test_matches_collapsed_joint(self, corpus_factory):
        # W=2, one 3-token paragraph, plus a second paragraph supplying counts
        corpus = corpus_factory({"a": [["x", "y", "x"], ["y", "y", "x"]]})
        g = [(0.5, 0.3, 0.2), (0.2, 0.2, 0.6), (0.5, 0.3, 0.2),
             (0.2, 0.2, 0.6), (0.2, 0.2, 0.6), (0.5, 0.3, 0.2)]
        s = [0, 2, 1, 2, 0, 1]
        state, hyper = make_state(corpus, s, g=g)
        for i in range(3):
            expected = []
            for l in range(3):
                trial = state.s.copy()
                trial[i] = l
                probe, _ = make_state(corpus, trial, g=g)
                expected.append(np.log(g[i][l]) + collapsed_log_joint(probe))
            expected = np.exp(np.array(expected) - np.max(expected))
            expected /= expected.sum()

            state.remove(i)
            actual = sample_wtopic_conditional(state, 0, i, hyper)
            state.add(i)
            np.testing.assert_allclose(actual, expected, rtol=1e-9)

    def test_uses_global_paragraph_index(self, corpus_factory):
        corpus = corpus_factory({"a": [["x"]], "b": [["y"], ["x", "y"]]})
        state, hyper = make_state(corpus, [0, 1, 2, 0])
        # Global paragraph 2 is the second paragraph of document b; token i=1 is flat token 3
        state.remove(3)
        conditional = sample_wtopic_conditional(state, 2, 1, hyper)
        state.add(3)
        assert conditional.shape == (3,)
        assert conditional.sum() == pytest.approx(1.0, abs=1e-12)


class TestSampler:

    def test_tables_match_recount_after_every_sweep(self, small_synthetic):
        corpus = small_synthetic.corpus
        vocab = build_vocabulary(corpus)
        tables = build_frequency_tables(corpus, vocab)
        hyper = WTopicHyper(eta=0.01, gamma=0.5, iterations=5, burn_in=2, seed=3)
        sweeps = []

        def check(sweep, state):
            assert check_consistency(state)
            np.testing.assert_allclose(state.g.sum(axis=1), 1.0, atol=1e-12)
            for n in (0, state.encoded.num_tokens // 2):
                state.remove(n)
                t = int(state.encoded.token_par[n])
                i = n - int(state.encoded.par_offsets[t])
                p = sample_wtopic_conditional(state, t, i, hyper)
                state.add(n)
                assert abs(p.sum() - 1.0) <= 1e-12
            sweeps.append(sweep)

        run_wtopic_sampler(corpus, tables, hyper, vocab, on_sweep=check)
        assert sweeps == [1, 2, 3, 4, 5]

    def test_same_seed_same_state(self, small_synthetic):
        corpus = small_synthetic.corpus
        tables = build_frequency_tables(corpus)
        hyper = WTopicHyper(eta=0.01, gamma=0.5, iterations=3, burn_in=1, seed=5)
        first = run_wtopic_sampler(corpus, tables, hyper)
        second = run_wtopic_sampler(corpus, tables, hyper)
        np.testing.assert_array_equal(first.s, second.s)
        np.testing.assert_array_equal(first.n_doc, second.n_doc)

    def test_zero_theme_coefficient_never_sampled(self, corpus_factory):
        # 'the' occurs in every paragraph, so its theme coefficient is exactly 0
        corpus = corpus_factory({"a": [["the", "x"], ["the", "y"]], "b": [["the", "z"]]})
        tables = build_frequency_tables(corpus)
        hyper = WTopicHyper(eta=0.01, gamma=0.5, iterations=20, burn_in=0, seed=1)
        state = run_wtopic_sampler(corpus, tables, hyper)
        the = state.vocab.index_of("the")
        assert state.n_theme[the] == 0

    def test_background_only_coefficient(self, corpus_factory):
        corpus = corpus_factory({"a": [["x"]]})
        vocab = build_vocabulary(corpus)
        sampler = WTopicSampler(corpus, build_frequency_tables(corpus, vocab),
                                WTopicHyper(eta=0.1, gamma=0.1, iterations=1, burn_in=0), vocab)
        encoded = sampler.encoded
        state = WTopicState(encoded, sampler.hyper, np.array([[1.0, 0.0, 0.0]]), np.array([0]))
        sampler.sweep(state, np.random.default_rng(0))
        assert state.s.tolist() == [WTopic.BACKGROUND]

    def test_recovers_generating_roles(self):
        from themealign.services.synthetic import generate_synthetic_corpus

        synthetic = generate_synthetic_corpus(num_docs=12, words_per_topic=100, seed=4)
        corpus = synthetic.corpus
        vocab = build_vocabulary(corpus)
        tables = build_frequency_tables(corpus, vocab)
        hyper = WTopicHyper(
            eta=vocab.size / 100000, gamma=vocab.size / corpus.num_paragraphs,
            iterations=30, burn_in=10, seed=0,
        )
        state = run_wtopic_sampler(corpus, tables, hyper, vocab)
        truth = np.concatenate(
            [np.array(r) for d in corpus.documents for r in synthetic.wtopics[d.id]]
        )
        theme_recall = np.mean(state.s[truth == WTopic.THEME] == WTopic.THEME)
        specific_leak = np.mean(state.s[truth == WTopic.DOCUMENT] == WTopic.THEME)
        assert theme_recall >= 0.6
        assert specific_leak <= 0.5


class TestInference:

    def test_unseen_document(self, small_synthetic, corpus_factory):
        corpus = small_synthetic.corpus
        tables = build_frequency_tables(corpus)
        hyper = WTopicHyper(eta=0.01, gamma=0.5, iterations=3, burn_in=1, seed=2)
        state = run_wtopic_sampler(corpus, tables, hyper)
        new = corpus_factory({"new": [["en_t0_1", "never", "seen"], ["en_bg0"]]}).documents[0]
        wtopics = infer_wtopics(new, state, tables, iterations=5)
        assert [len(w) for w in wtopics] == [3, 1]
        assert all(((w >= 0) & (w < 3)).all() for w in wtopics)
        again = infer_wtopics(new, state, tables, iterations=5)
        assert all(np.array_equal(a, b) for a, b in zip(wtopics, again))


class TestExport:

    def test_single_word_corpus(self, corpus_factory):
        corpus = corpus_factory({"a": [["x", "x"]]})
        state = run_wtopic_sampler(
            corpus, build_frequency_tables(corpus),
            WTopicHyper(eta=0.1, gamma=0.1, iterations=2, burn_in=0),
        )
        models = export_language_models(state, top_n=5)
        assert models.background == ["x"]
        assert models.document_specific == {"a": ["x"]}
        assert models.theme_specific == ["x"]
        assert models.background_by_language == {"en": ["x"]}

    def test_ranking_by_count(self, corpus_factory):
        corpus = corpus_factory({"a": [["x", "y", "y", "z"]]})
        state, _ = make_state(corpus, [0, 0, 0, 2])
        models = export_language_models(state, top_n=2)
        assert models.background == ["y", "x"]
        assert models.theme_specific[0] == "z"

    def test_languages_rank_their_own_words(self, corpus_factory):
        from themealign.services.corpus_loader import concatenate

        en = corpus_factory({"en-1": [["the", "city"]]}, lang="en")
        fr = corpus_factory({"fr-1": [["le", "ville"]]}, lang="fr")
        corpus = concatenate(en, fr)
        state, _ = make_state(corpus, [0, 1, 0, 1])
        models = export_language_models(state, top_n=10)
        assert models.background_by_language["en"][0] == "the"
        assert set(models.background_by_language["en"]) == {"the", "city"}
        assert set(models.background_by_language["fr"]) == {"le", "ville"}
