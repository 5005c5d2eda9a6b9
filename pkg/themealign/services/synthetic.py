"""
Synthetic corpora drawn from the generative story of the model

Each document describes one entity. Its paragraphs follow a sticky chain
of themes; every token is first given a role (background, entity-specific
or theme-specific) and then drawn from the matching word list. Background
words follow a Zipf law so that a few of them occur almost everywhere.
Theme word lists may contain concept IDs shared across languages, linked
to each other in a relation graph.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.relations import RelationGraph
from ..schemas.corpus import Corpus, Document, Paragraph, Token
from ..schemas.model import WTopic

logger = logging.getLogger(__name__)

CONCEPT_BASE = 100000


def heading_of(topic: int) -> str:
    return f"theme-{topic}"


def concept_id(topic: int, i: int) -> str:
    return f"c{CONCEPT_BASE + topic * 1000 + i}"


class SyntheticCorpus:
    """A generated corpus with its generating labels"""

    def __init__(
        self,
        corpus: Corpus,
        topics: Dict[str, List[int]],
        wtopics: Dict[str, List[List[int]]],
        relations: RelationGraph,
    ):
        self.corpus = corpus
        self.topics = topics
        self.wtopics = wtopics
        self.relations = relations

    def split_by_language(self) -> Tuple[Corpus, ...]:
        """One corpus per language, in declared language order"""
        return tuple(
            Corpus(documents=[d for d in self.corpus.documents if d.lang == lang], languages=[lang])
            for lang in self.corpus.languages
        )


def synthetic_relations(num_topics: int, concepts_per_topic: int) -> RelationGraph:
    """Ring of related concepts inside each theme"""
    graph = RelationGraph()
    for j in range(num_topics):
        for i in range(concepts_per_topic):
            following = (i + 1) % concepts_per_topic
            if following != i:
                graph.add_edge(concept_id(j, i), concept_id(j, following), 1.0)
    return graph


def generate_synthetic_corpus(
    num_docs: int = 20,
    num_topics: int = 5,
    paragraphs_per_doc: int = 10,
    tokens_per_paragraph: int = 30,
    background_words: int = 100,
    words_per_topic: int = 40,
    specific_words_per_doc: int = 10,
    concepts_per_topic: int = 0,
    stay_probability: float = 0.8,
    wtopic_mix: Sequence[float] = (0.25, 0.15, 0.6),
    languages: Sequence[str] = ("en",),
    seed: int = 0,
) -> SyntheticCorpus:
    """
    Draw a corpus with known paragraph themes and token roles

    With several languages, documents alternate between them and every
    entity is described once per language; entity-specific words (names)
    and concept IDs are shared, all other words are language-specific.

    Args:
        num_docs: Documents per language
        num_topics: Number of themes
        paragraphs_per_doc: Paragraphs per document
        tokens_per_paragraph: Tokens per paragraph
        background_words: Background vocabulary size per language
        words_per_topic: Plain theme words per theme and language
        specific_words_per_doc: Entity-specific words per entity
        concepts_per_topic: Concept IDs added to each theme's word list
        stay_probability: Chance that a paragraph keeps the previous theme
        wtopic_mix: Probabilities of the background / specific / theme roles
        languages: Document languages
        seed: Random seed

    Returns:
        The corpus, its generating themes and roles, and the concept relations
    """
    if num_topics < 2:
        raise ValueError("need at least two themes")
    mix = np.asarray(wtopic_mix, dtype=float)
    if mix.shape != (3,) or (mix < 0).any() or mix.sum() <= 0:
        raise ValueError("wtopic_mix must hold three non-negative weights")
    mix = mix / mix.sum()

    rng = np.random.default_rng(seed)
    zipf = 1.0 / np.arange(1, background_words + 1)
    zipf /= zipf.sum()

    documents: List[Document] = []
    topics: Dict[str, List[int]] = {}
    wtopics: Dict[str, List[List[int]]] = {}
    for entity in range(num_docs):
        names = [f"entity{entity}_{i}" for i in range(specific_words_per_doc)]
        for lang in languages:
            theme_lists = [
                [f"{lang}_t{j}_{i}" for i in range(words_per_topic)]
                + [concept_id(j, i) for i in range(concepts_per_topic)]
                for j in range(num_topics)
            ]
            sequence = _sticky_sequence(rng, num_topics, paragraphs_per_doc, stay_probability)
            doc_id = f"{lang}-{entity:04d}"
            paragraphs = []
            roles = []
            for t, j in enumerate(sequence):
                draws = rng.choice(3, size=tokens_per_paragraph, p=mix)
                tokens = []
                for role in draws:
                    if role == WTopic.BACKGROUND:
                        tokens.append(f"{lang}_bg{rng.choice(background_words, p=zipf)}")
                    elif role == WTopic.DOCUMENT:
                        tokens.append(names[rng.integers(len(names))])
                    else:
                        tokens.append(theme_lists[j][rng.integers(len(theme_lists[j]))])
                paragraphs.append(
                    Paragraph(
                        id=f"p{t + 1}",
                        heading=heading_of(j),
                        tokens=[Token.from_raw(key) for key in tokens],
                    )
                )
                roles.append([int(r) for r in draws])
            documents.append(
                Document(id=doc_id, lang=lang, title=f"Entity {entity}", paragraphs=paragraphs)
            )
            topics[doc_id] = sequence
            wtopics[doc_id] = roles

    corpus = Corpus(documents=documents, languages=list(languages))
    logger.info(
        "generated %d documents, %d paragraphs, %d tokens",
        len(corpus), corpus.num_paragraphs, corpus.num_tokens,
    )
    return SyntheticCorpus(corpus, topics, wtopics, synthetic_relations(num_topics, concepts_per_topic))


def _sticky_sequence(
    rng: np.random.Generator, num_topics: int, length: int, stay_probability: float
) -> List[int]:
    sequence = [int(rng.integers(num_topics))]
    for _ in range(length - 1):
        if rng.random() < stay_probability:
            sequence.append(sequence[-1])
        else:
            others = [j for j in range(num_topics) if j != sequence[-1]]
            sequence.append(int(others[rng.integers(len(others))]))
    return sequence


def generating_headings(synthetic: SyntheticCorpus, languages: Optional[Sequence[str]] = None) -> Dict[Tuple[str, str], str]:
    """Gold headings of the generated paragraphs (optionally restricted to some languages)"""
    return {
        key: heading
        for key, heading in synthetic.corpus.headings().items()
        if languages is None or synthetic.corpus.document(key[0]).lang in languages
    }
