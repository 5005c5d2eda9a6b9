"""Sticky-HMM theme layer: transitions, concept boost, conditionals, sampling and decoding"""

import itertools

import numpy as np
import pytest
from scipy.special import gammaln

from themealign.core.lda2 import EncodedCorpus, WTopicState, run_wtopic_sampler
from themealign.core.relations import RelationGraph
from themealign.core.theme_hmm import (
    NeighborIndex,
    ThemeDecoder,
    ThemeSampler,
    ThemeState,
    boost_vector,
    check_theme_consistency,
    concept_boost,
    run_theme_sampler,
    sample_ttopic_conditional,
    theme_diagnostics,
    theme_keys,
    topic_language_models,
    transition_matrix,
    transition_probability,
    viterbi_decode,
)
from themealign.schemas.corpus import Vocabulary
from themealign.schemas.model import ThemeHyper, WTopic, WTopicHyper
from themealign.services.corpus_loader import build_frequency_tables, build_vocabulary


def theme_hyper(**overrides):
    values = dict(k=2, beta=0.1, lam=0.5, alpha=0.01, kappa=1000.0, iterations=0, burn_in=0)
    values.update(overrides)
    return ThemeHyper(**values)


def frozen_wtopics(corpus, role=WTopic.THEME):
    """W-topic state with every token given the same role"""
    encoded = EncodedCorpus.from_corpus(corpus, build_vocabulary(corpus))
    n = encoded.num_tokens
    return WTopicState(
        encoded,
        WTopicHyper(eta=0.1, gamma=0.1, iterations=0, burn_in=0),
        np.full((n, 3), 1.0 / 3.0),
        np.full(n, int(role)),
    )


def make_theme_state(corpus, z, hyper):
    wstate = frozen_wtopics(corpus)
    theme_words = ThemeSampler(wstate, hyper).theme_words
    return ThemeState(wstate.encoded, hyper, theme_words, np.array(z))


def dirichlet_multinomial(counts, prior):
    counts = np.asarray(counts, dtype=float)
    prior = np.broadcast_to(np.asarray(prior, dtype=float), counts.shape)
    return (
        gammaln(prior.sum()) - gammaln(counts.sum() + prior.sum())
        + (gammaln(counts + prior) - gammaln(prior)).sum()
    )


def collapsed_log_joint(state, hyper):
    """log p(words, z) with every table rebuilt from the assignments"""
    K = hyper.k
    total = sum(dirichlet_multinomial(row, hyper.lam) for row in state.doc_topic)
    total += sum(dirichlet_multinomial(row, hyper.beta) for row in state.topic_word)
    if hyper.use_transitions:
        total += dirichlet_multinomial(state.initial, hyper.lam)
        for j in range(K):
            prior = np.full(K, hyper.alpha)
            prior[j] += hyper.kappa
            total += dirichlet_multinomial(state.trans[j], prior)
    return total


class TestTransitions:

    @pytest.fixture
    def single_paragraph_docs(self, corpus_factory):
        return corpus_factory({"a": [["x"]], "b": [["y"]]})

    def test_self_transition_with_zero_counts(self, single_paragraph_docs):
        hyper = theme_hyper()
        state = make_theme_state(single_paragraph_docs, [0, 1], hyper)
        assert state.trans.sum() == 0
        assert transition_probability(0, 0, state, hyper) == pytest.approx(1000.01 / 1000.02)
        assert transition_probability(0, 1, state, hyper) == pytest.approx(0.01 / 1000.02)

    def test_stickiness_grows_with_kappa(self, corpus_factory):
        corpus = corpus_factory({"a": [["x"], ["y"], ["x"], ["y"]]})
        previous = -1.0
        for kappa in (0.0, 1.0, 10.0, 1000.0):
            hyper = theme_hyper(kappa=kappa)
            state = make_theme_state(corpus, [0, 1, 0, 1], hyper)
            stay = transition_probability(0, 0, state, hyper)
            assert stay > previous
            previous = stay

    def test_rows_sum_to_one(self, small_synthetic):
        hyper = theme_hyper(k=3, kappa=5.0)
        corpus = small_synthetic.corpus
        z = np.arange(corpus.num_paragraphs) % 3
        state = make_theme_state(corpus, z, hyper)
        matrix = transition_matrix(state, hyper)
        np.testing.assert_allclose(matrix.sum(axis=1), 1.0)
        for j, k in itertools.product(range(3), repeat=2):
            assert matrix[j, k] == pytest.approx(transition_probability(j, k, state, hyper))


class TestConceptBoost:

    def test_mean_of_neighbor_shares(self):
        vocab = Vocabulary(words=["c1", "c2", "c3"])
        graph = RelationGraph([("c1", "c2", 1.0), ("c1", "c3", 1.0)])
        # c2 went 3 of 4 times to topic 0, c3 1 of 2 times
        topic_word = np.array([[0, 3, 1], [0, 1, 1]])
        boost = boost_vector("c1", topic_word, NeighborIndex(vocab, graph))
        assert boost[0] == pytest.approx(0.625)
        assert boost[1] == pytest.approx(0.375)

    def test_all_neighbors_in_one_topic(self, corpus_factory):
        corpus = corpus_factory({"a": [["c2", "c3"], ["c1"]]})
        graph = RelationGraph([("c1", "c2", 1.0), ("c1", "c3", 1.0)])
        state = make_theme_state(corpus, [0, 1], theme_hyper())
        assert concept_boost("c1", 0, state, graph) == 1.0
        assert concept_boost("c1", 1, state, graph) == 0.0

    def test_unseen_neighbors_count_uniformly(self):
        vocab = Vocabulary(words=["c1", "c2"])
        graph = RelationGraph([("c1", "c2", 1.0), ("c1", "c9", 1.0)])
        topic_word = np.array([[0, 0], [0, 0]])
        boost = boost_vector("c1", topic_word, NeighborIndex(vocab, graph))
        np.testing.assert_allclose(boost, [0.5, 0.5])

    def test_words_and_isolated_concepts_are_neutral(self):
        vocab = Vocabulary(words=["river", "c1", "c2"])
        graph = RelationGraph([("c2", "c7", 1.0)])
        index = NeighborIndex(vocab, graph)
        topic_word = np.array([[4, 1, 0], [0, 2, 0], [1, 1, 1]])
        np.testing.assert_array_equal(boost_vector("river", topic_word, index), np.ones(3))
        np.testing.assert_array_equal(boost_vector("c1", topic_word, index), np.ones(3))


class TestConditional:

    def test_single_token_example(self, corpus_factory):
        # W=10; 'w0' seen 5 times under topic 1 and never under topic 0
        corpus = corpus_factory(
            {
                "target": [["w0"]],
                "seen": [["w0", "w0", "w0", "w0", "w0"]],
                "other": [[f"w{i}" for i in range(1, 10)]],
            }
        )
        hyper = theme_hyper(kappa=0.0, beta=0.1, use_transitions=False, use_concept_boost=False)
        state = make_theme_state(corpus, [0, 1, 0], hyper)
        assert state.vocab.size == 10
        state.remove_paragraph(0)
        p = sample_ttopic_conditional(state, 0, hyper)
        weights = np.array([(0 + 0.1) / (9 + 1.0), (5 + 0.1) / (5 + 1.0)])
        np.testing.assert_allclose(p, weights / weights.sum(), rtol=1e-12)

    @pytest.mark.parametrize("use_transitions", [True, False])
    def test_matches_collapsed_joint(self, corpus_factory, use_transitions):
        corpus = corpus_factory(
            {
                "a": [["x", "y"], ["y"], ["z", "z", "x"], ["w"]],
                "b": [["x"], ["v", "w"], ["v"]],
            }
        )
        hyper = theme_hyper(
            k=3, beta=0.1, lam=0.5, alpha=0.3, kappa=2.0,
            use_transitions=use_transitions, use_concept_boost=False,
        )
        z = np.array([1, 1, 1, 0, 2, 2, 0])
        state = make_theme_state(corpus, z, hyper)
        for t in range(len(z)):
            expected = []
            for j in range(3):
                trial = z.copy()
                trial[t] = j
                expected.append(collapsed_log_joint(make_theme_state(corpus, trial, hyper), hyper))
            expected = np.exp(np.array(expected) - max(expected))
            expected /= expected.sum()

            state.remove_paragraph(t)
            actual = sample_ttopic_conditional(state, t, hyper)
            state.add_paragraph(t)
            np.testing.assert_allclose(actual, expected, rtol=1e-9)
        assert check_theme_consistency(state)


@pytest.fixture(scope="module")
def trained(small_synthetic):
    corpus = small_synthetic.corpus
    vocab = build_vocabulary(corpus)
    tables = build_frequency_tables(corpus, vocab)
    wstate = run_wtopic_sampler(
        corpus, tables, WTopicHyper(eta=0.01, gamma=0.5, iterations=5, burn_in=2, seed=1), vocab
    )
    return wstate, small_synthetic.relations


class TestSampler:

    def test_tables_match_recount_after_every_sweep(self, trained):
        wstate, graph = trained
        hyper = theme_hyper(k=3, iterations=6, burn_in=2, seed=4)
        seen = []

        def check(sweep, state):
            assert check_theme_consistency(state)
            for t in (0, state.encoded.num_paragraphs - 1):
                state.remove_paragraph(t)
                p = sample_ttopic_conditional(state, t, hyper, graph)
                state.add_paragraph(t)
                assert abs(p.sum() - 1.0) <= 1e-12
            seen.append(sweep)

        run_theme_sampler(wstate, hyper, graph, on_sweep=check)
        assert seen == list(range(1, 7))

    def test_same_seed_same_topics(self, trained):
        wstate, graph = trained
        hyper = theme_hyper(k=3, iterations=4, burn_in=1, seed=9)
        first = run_theme_sampler(wstate, hyper, graph)
        second = run_theme_sampler(wstate, hyper, graph)
        np.testing.assert_array_equal(first.z, second.z)
        np.testing.assert_array_equal(first.topic_word, second.topic_word)

    def test_kappa_orders_topic_switches(self, corpus_factory):
        # No theme tokens: topics follow the mixture and transition priors alone
        corpus = corpus_factory({f"d{i}": [["x"]] * 10 for i in range(20)})
        wstate = frozen_wtopics(corpus, role=WTopic.BACKGROUND)
        switches = {}
        for kappa in (0.0, 10.0, 1000.0):
            switches[kappa] = sum(
                run_theme_sampler(
                    wstate,
                    theme_hyper(k=4, lam=100.0, kappa=kappa, iterations=30, burn_in=10, seed=seed),
                ).mean_switches()
                for seed in range(3)
            )
        assert switches[1000.0] <= switches[10.0] <= switches[0.0]
        assert switches[1000.0] < switches[0.0]

    def test_diagnostics_flag_documents_without_theme_tokens(self, corpus_factory):
        corpus = corpus_factory({"a": [["x"], ["y"]]})
        wstate = frozen_wtopics(corpus, role=WTopic.BACKGROUND)
        state = ThemeSampler(wstate, theme_hyper()).initialize(np.random.default_rng(0))
        diagnostics = theme_diagnostics(state)
        assert diagnostics.documents_without_theme_tokens == ["a"]
        assert diagnostics.paragraphs_without_theme_tokens == 2
        assert diagnostics.theme_tokens == 0

    def test_topic_language_models(self, corpus_factory):
        corpus = corpus_factory({"a": [["x", "x", "y"], ["z"]]})
        state = make_theme_state(corpus, [0, 1], theme_hyper())
        assert topic_language_models(state, top_n=2) == {0: ["x", "y"], 1: ["z", "x"]}


class TestDecoding:

    def test_decoding_beats_sampled_topics(self, trained):
        wstate, graph = trained
        hyper = theme_hyper(k=3, iterations=5, burn_in=2, seed=2)
        state = run_theme_sampler(wstate, hyper, graph)
        decoder = ThemeDecoder(state, hyper, graph)
        for d in range(state.encoded.num_docs):
            keys = decoder.training_keys(d)
            decoded = decoder.decode(keys, d)
            assert decoder.log_probability(keys, decoded, d) >= (
                decoder.log_probability(keys, state.document_topics(d), d) - 1e-9
            )

    def test_matches_enumeration(self, trained):
        wstate, graph = trained
        hyper = theme_hyper(k=3, kappa=3.0, iterations=3, burn_in=1, seed=2)
        state = run_theme_sampler(wstate, hyper, graph)
        decoder = ThemeDecoder(state, hyper, graph)
        keys = decoder.training_keys(0)
        best = max(
            decoder.log_probability(keys, path, 0)
            for path in itertools.product(range(3), repeat=len(keys))
        )
        decoded = decoder.decode(keys, 0)
        assert decoder.log_probability(keys, decoded, 0) == pytest.approx(best, abs=1e-9)

    def test_training_document_through_public_api(self, trained, small_synthetic):
        wstate, graph = trained
        hyper = theme_hyper(k=3, iterations=3, burn_in=1, seed=2)
        state = run_theme_sampler(wstate, hyper, graph)
        document = small_synthetic.corpus.documents[1]
        start = int(wstate.encoded.doc_offsets[1])
        wtopics = [
            wstate.s[wstate.encoded.paragraph_slice(t)]
            for t in range(start, start + len(document.paragraphs))
        ]
        decoder = ThemeDecoder(state, hyper, graph)
        assert viterbi_decode(document, state, hyper, graph, wtopics) == decoder.decode(
            decoder.training_keys(1), 1
        )

    def test_theme_keys_filter_by_wtopic(self, corpus_factory):
        document = corpus_factory({"a": [["the", "hockey", "c5"]]}).documents[0]
        wtopics = [np.array([WTopic.BACKGROUND, WTopic.THEME, WTopic.THEME])]
        assert theme_keys(document, wtopics) == [["hockey", "c5"]]
        assert theme_keys(document) == [["the", "hockey", "c5"]]

    def test_empty_document_sequence(self, trained):
        wstate, graph = trained
        hyper = theme_hyper(k=3, iterations=1, burn_in=0)
        decoder = ThemeDecoder(run_theme_sampler(wstate, hyper, graph), hyper, graph)
        assert decoder.decode([]) == []

    def test_without_transitions_each_paragraph_is_independent(self, trained):
        wstate, graph = trained
        hyper = theme_hyper(k=3, use_transitions=False, iterations=3, burn_in=1, seed=6)
        state = run_theme_sampler(wstate, hyper, graph)
        decoder = ThemeDecoder(state, hyper, graph)
        keys = decoder.training_keys(2)
        emissions = decoder.emissions(keys, 2)
        assert decoder.decode(keys, 2) == [int(np.argmax(row)) for row in emissions]
