"""Cross-collection document pairing"""

import itertools

import numpy as np
import pytest

from themealign.core.lda2 import EncodedCorpus, WTopicState
from themealign.errors import ThemeAlignError
from themealign.schemas.alignment import DocAlignMode
from themealign.schemas.model import WTopic, WTopicHyper
from themealign.services.corpus_loader import build_vocabulary, concatenate
from themealign.services.document_alignment import (
    align_documents,
    load_gold_pairs,
    tfidf_vectors,
    title_pairs,
    topic_vectors,
)


@pytest.fixture
def city_collections(corpus_factory):
    """Three documents per language; matching documents share concepts and titles"""
    corpus_a = corpus_factory(
        {
            "a1": [["c1", "c1", "city"], ["c2", "hockey"]],
            "a2": [["c3", "c4", "river"]],
            "a3": [["c5", "c6", "c5"]],
        },
        titles={"a1": "Montreal", "a2": "Paris", "a3": "Rome"},
    )
    corpus_b = corpus_factory(
        {
            "b1": [["c5", "c6"]],
            "b2": [["c1", "c2", "ville"]],
            "b3": [["c3", "c4", "c4", "fleuve"]],
        },
        titles={"b1": "ROME", "b2": "montreal", "b3": "Paris "},
        lang="fr",
    )
    return corpus_a, corpus_b


def document_specific_state(corpus):
    """W-topic state with every token assigned to its document-specific model"""
    vocab = build_vocabulary(corpus)
    encoded = EncodedCorpus.from_corpus(corpus, vocab)
    n = encoded.num_tokens
    return WTopicState(
        encoded,
        WTopicHyper(eta=0.01, gamma=1.0),
        np.full((n, 3), 1.0 / 3.0),
        np.full(n, int(WTopic.DOCUMENT)),
    )


class TestVectors:

    def test_tfidf_weights(self, city_collections):
        (vectors_a, vectors_b) = tfidf_vectors(list(city_collections), concepts=True, top_n=20)
        # every concept occurs in exactly two of the six documents
        idf = np.log(3.0)
        assert vectors_a[0] == pytest.approx({"c1": 2 * idf, "c2": idf})
        assert vectors_b[2] == pytest.approx({"c3": idf, "c4": 2 * idf})

    def test_words_mode_ignores_concepts(self, city_collections):
        (vectors_a, _) = tfidf_vectors(list(city_collections), concepts=False, top_n=20)
        assert set(vectors_a[0]) == {"city", "hockey"}
        assert vectors_a[2] == {}

    def test_top_n_keeps_heaviest(self, city_collections):
        (vectors_a, _) = tfidf_vectors(list(city_collections), concepts=True, top_n=1)
        assert list(vectors_a[0]) == ["c1"]

    def test_ubiquitous_terms_are_dropped(self, corpus_factory):
        corpus = corpus_factory({"a": [["c1", "c2"]], "b": [["c1"]]})
        (vectors,) = tfidf_vectors([corpus], concepts=True, top_n=5)
        assert vectors == [{"c2": pytest.approx(np.log(2.0))}, {}]

    def test_topic_vectors(self, corpus_factory):
        corpus = corpus_factory({"a": [["x", "x", "y"]], "b": [["y"]]})
        state = document_specific_state(corpus)
        (vectors,) = topic_vectors([corpus], state, top_n=5)
        # (n_w + eta) / (n_doc + W eta) with W = 2
        assert vectors[0] == pytest.approx({"x": 2.01 / 3.02, "y": 1.01 / 3.02})
        assert vectors[1] == pytest.approx({"y": 1.01 / 1.02})

    def test_topic_vectors_need_known_documents(self, corpus_factory):
        state = document_specific_state(corpus_factory({"a": [["x"]]}))
        with pytest.raises(ThemeAlignError):
            topic_vectors([corpus_factory({"z": [["x"]]})], state, top_n=5)


class TestGoldPairs:

    def test_title_pairs_fold_case(self, city_collections):
        assert title_pairs(*city_collections) == {"a1": "b2", "a2": "b3", "a3": "b1"}

    def test_untitled_documents_have_no_pair(self, corpus_factory):
        corpus_a = corpus_factory({"a": [["x"]]})
        corpus_b = corpus_factory({"b": [["x"]]}, lang="fr")
        assert title_pairs(corpus_a, corpus_b) == {}

    def test_load_gold_pairs(self, write_text):
        path = write_text("gold.tsv", "a1\tb2\na2 \tb3\n")
        assert load_gold_pairs(path) == {"a1": "b2", "a2": "b3"}


class TestAlignDocuments:

    def test_concept_mode_recovers_titles(self, city_collections):
        result = align_documents(*city_collections, mode=DocAlignMode.TFIDF_CONCEPTS)
        assert set(result.pairs) == {("a1", "b2"), ("a2", "b3"), ("a3", "b1")}
        assert result.accuracy == 1.0
        assert result.correct == 3
        assert result.unpaired_a == result.unpaired_b == []
        np.testing.assert_allclose(result.similarities, [3 / np.sqrt(10)] * 3)

    def test_explicit_gold_overrides_titles(self, city_collections):
        result = align_documents(*city_collections, gold={"a1": "b1", "a2": "b3"})
        assert result.correct == 1
        assert result.accuracy == 0.5

    def test_gold_pairs_outside_the_collections_are_ignored(self, city_collections):
        result = align_documents(*city_collections, gold={"a1": "b2", "a9": "b9"})
        assert result.accuracy == 1.0

    def test_uneven_collections(self, city_collections, corpus_factory):
        corpus_a, _ = city_collections
        corpus_b = corpus_factory({"b2": [["c1", "c2"]], "b3": [["c3", "c4"]]}, lang="fr")
        result = align_documents(corpus_a, corpus_b)
        assert len(result.pairs) == 2
        assert result.unpaired_a == ["a3"]
        assert result.accuracy is None

    def test_doc_topic_mode(self, corpus_factory):
        corpus_a = corpus_factory(
            {"a1": [["montreal", "hockey"]], "a2": [["paris", "wine"]]},
            titles={"a1": "Montreal", "a2": "Paris"},
        )
        corpus_b = corpus_factory(
            {"b1": [["paris", "vin"]], "b2": [["montreal", "hockey"]]},
            titles={"b1": "Paris", "b2": "Montreal"},
            lang="fr",
        )
        state = document_specific_state(concatenate(corpus_a, corpus_b))
        result = align_documents(corpus_a, corpus_b, mode=DocAlignMode.DOC_TOPIC, state=state)
        assert result.pairs == [("a1", "b2"), ("a2", "b1")]
        assert result.accuracy == 1.0

    def test_doc_topic_mode_needs_a_model(self, city_collections):
        with pytest.raises(ThemeAlignError):
            align_documents(*city_collections, mode=DocAlignMode.DOC_TOPIC)


def cosine(u, v):
    dot = sum(weight * v.get(term, 0.0) for term, weight in u.items())
    norms = np.sqrt(sum(w * w for w in u.values())) * np.sqrt(sum(w * w for w in v.values()))
    return dot / norms if norms else 0.0


class TestAgainstReferences:

    @pytest.fixture
    def copied_collections(self, corpus_factory):
        """Collection B repeats collection A under other document ids"""
        documents = {
            "1": [["c1", "c1", "city", "harbour"], ["c2", "hockey"]],
            "2": [["c3", "c4", "river", "wine"]],
            "3": [["c5", "c6", "forum", "c5", "ruins"]],
        }
        titles = {"1": "Montreal", "2": "Paris", "3": "Rome"}
        corpus_a = corpus_factory(
            {f"a{k}": v for k, v in documents.items()}, titles={f"a{k}": t for k, t in titles.items()}
        )
        corpus_b = corpus_factory(
            {f"b{k}": v for k, v in documents.items()},
            titles={f"b{k}": t for k, t in titles.items()},
            lang="fr",
        )
        return corpus_a, corpus_b

    @pytest.mark.parametrize("mode", list(DocAlignMode))
    def test_copied_collection_pairs_perfectly(self, copied_collections, mode):
        corpus_a, corpus_b = copied_collections
        state = document_specific_state(concatenate(corpus_a, corpus_b))
        result = align_documents(corpus_a, corpus_b, mode=mode, state=state)
        assert set(result.pairs) == {("a1", "b1"), ("a2", "b2"), ("a3", "b3")}
        assert result.accuracy == 1.0
        np.testing.assert_allclose(result.similarities, [1.0] * 3)

    def test_pairs_match_the_best_total_assignment(self, corpus_factory):
        corpus_a = corpus_factory(
            {"a1": [["c1", "c1", "c2", "c7"]], "a2": [["c3", "c4", "c8"]], "a3": [["c5", "c6", "c5", "c7"]]},
            titles={"a1": "Montreal", "a2": "Paris", "a3": "Rome"},
        )
        corpus_b = corpus_factory(
            {"b1": [["c5", "c6", "c8"]], "b2": [["c1", "c2", "c7"]], "b3": [["c3", "c4", "c4"]]},
            titles={"b1": "Rome", "b2": "Montreal", "b3": "Paris"},
            lang="fr",
        )
        vectors_a, vectors_b = tfidf_vectors([corpus_a, corpus_b], concepts=True, top_n=20)
        similarity = [[cosine(u, v) for v in vectors_b] for u in vectors_a]
        best = max(
            itertools.permutations(range(3)),
            key=lambda columns: sum(similarity[i][j] for i, j in enumerate(columns)),
        )
        ids_a = [d.id for d in corpus_a.documents]
        ids_b = [d.id for d in corpus_b.documents]
        expected = {(ids_a[i], ids_b[j]) for i, j in enumerate(best)}

        result = align_documents(corpus_a, corpus_b, mode=DocAlignMode.TFIDF_CONCEPTS)
        assert set(result.pairs) == expected
        assert expected == {("a1", "b2"), ("a2", "b3"), ("a3", "b1")}
        assert result.accuracy == 1.0
