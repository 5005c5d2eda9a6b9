"""
Document alignment across two collections

Every document is reduced to its top-N weighted terms (tf-idf over plain
words, tf-idf over concepts, or its document-specific language model from
a model trained on both collections), documents are paired greedily by
cosine similarity and the pairing is scored against gold pairs.
"""

import logging
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from sklearn.feature_extraction import DictVectorizer
from sklearn.metrics.pairwise import cosine_similarity

from ..core.lda2 import WTopicState
from ..errors import ThemeAlignError
from ..schemas.alignment import DocAlignMode, DocumentAlignment
from ..schemas.corpus import Corpus
from .baselines import greedy_pairs

logger = logging.getLogger(__name__)

TermWeights = Dict[str, float]


def _top(weights: TermWeights, top_n: int) -> TermWeights:
    ranked = sorted(weights.items(), key=lambda item: (-item[1], item[0]))
    return dict(r for r in ranked[:top_n] if r[1] > 0)


def tfidf_vectors(corpora: List[Corpus], concepts: bool, top_n: int) -> List[List[TermWeights]]:
    """
    Top-N tf-idf terms of every document

    tf counts occurrences in the document; idf = log(D / df) with D and df
    over the documents of all given collections.

    Args:
        corpora: Collections sharing one idf
        concepts: Rank concept tokens (True) or plain words (False)
        top_n: Terms kept per document

    Returns:
        Per collection, per document: term -> weight
    """
    counts = [
        [
            Counter(
                t.key for p in document.paragraphs for t in p.tokens if t.is_concept == concepts
            )
            for document in corpus.documents
        ]
        for corpus in corpora
    ]
    df: Counter = Counter()
    for collection in counts:
        for document in collection:
            df.update(document.keys())
    total = sum(len(collection) for collection in counts)
    return [
        [
            _top({term: tf * np.log(total / df[term]) for term, tf in document.items()}, top_n)
            for document in collection
        ]
        for collection in counts
    ]


def topic_vectors(corpora: List[Corpus], state: WTopicState, top_n: int) -> List[List[TermWeights]]:
    """
    Top-N words of each document's document-specific language model

    Weights are (n_w + eta) / (n_* + W eta) for words the document assigned
    to its specific model.

    Raises:
        ThemeAlignError: a document is not part of the model
    """
    vocab = state.vocab
    w_eta = vocab.size * state.hyper.eta
    vectors = []
    for corpus in corpora:
        collection = []
        for document in corpus.documents:
            d = state.encoded.doc_index(document.id)
            if d is None:
                raise ThemeAlignError(f"document '{document.id}' is not part of the model")
            row = state.n_doc[d]
            present = np.flatnonzero(row)
            probabilities = (row[present] + state.hyper.eta) / (state.n_doc_total[d] + w_eta)
            collection.append(
                _top({vocab.word(int(w)): float(p) for w, p in zip(present, probabilities)}, top_n)
            )
        vectors.append(collection)
    return vectors


def load_gold_pairs(path: Path) -> Dict[str, str]:
    """Read ``doc_id_a<TAB>doc_id_b`` lines"""
    frame = pd.read_csv(
        path, sep="\t", header=None, names=["a", "b"], dtype=str, keep_default_na=False
    )
    return dict(zip(frame["a"].str.strip(), frame["b"].str.strip()))


def title_pairs(corpus_a: Corpus, corpus_b: Corpus) -> Dict[str, str]:
    """Gold pairs from identical case-folded, non-empty titles"""
    by_title = {}
    for document in corpus_b.documents:
        title = document.title.casefold().strip()
        if title:
            by_title.setdefault(title, document.id)
    return {
        document.id: by_title[document.title.casefold().strip()]
        for document in corpus_a.documents
        if document.title.casefold().strip() in by_title
    }


def align_documents(
    corpus_a: Corpus,
    corpus_b: Corpus,
    mode: DocAlignMode = DocAlignMode.TFIDF_CONCEPTS,
    top_n: int = 20,
    state: Optional[WTopicState] = None,
    gold: Optional[Dict[str, str]] = None,
) -> DocumentAlignment:
    """
    Pair the documents of two collections

    Args:
        corpus_a: First collection
        corpus_b: Second collection
        mode: Document representation
        top_n: Terms per document vector
        state: W-topic model trained on both collections (doc-topic mode)
        gold: Correct pairs; defaults to pairs of identical titles

    Returns:
        Pairs in the order they were formed, with accuracy against the gold
        pairing when one is available
    """
    if mode == DocAlignMode.DOC_TOPIC:
        if state is None:
            raise ThemeAlignError("doc-topic alignment needs a trained model")
        vectors_a, vectors_b = topic_vectors([corpus_a, corpus_b], state, top_n)
    else:
        concepts = mode == DocAlignMode.TFIDF_CONCEPTS
        vectors_a, vectors_b = tfidf_vectors([corpus_a, corpus_b], concepts, top_n)

    vectorizer = DictVectorizer(sort=True)
    matrix = vectorizer.fit_transform(vectors_a + vectors_b)
    split = len(vectors_a)
    if matrix.shape[1] == 0:
        similarity = np.zeros((split, len(vectors_b)))
    else:
        similarity = cosine_similarity(matrix[:split], matrix[split:])

    ids_a = [d.id for d in corpus_a.documents]
    ids_b = [d.id for d in corpus_b.documents]
    formed = greedy_pairs(similarity)
    pairs = [(ids_a[i], ids_b[j]) for i, j, _ in formed]
    paired_a = {a for a, _ in pairs}
    paired_b = {b for _, b in pairs}

    gold = gold if gold is not None else title_pairs(corpus_a, corpus_b)
    gold = {a: b for a, b in gold.items() if a in set(ids_a) and b in set(ids_b)}
    correct = sum(1 for a, b in pairs if gold.get(a) == b)
    accuracy = correct / len(gold) if gold else None
    if len(ids_a) != len(ids_b):
        logger.warning(
            "collections differ in size (%d vs %d); %d documents stay unpaired",
            len(ids_a), len(ids_b), abs(len(ids_a) - len(ids_b)),
        )
    if accuracy is not None:
        logger.info("%s document alignment: %d/%d correct", mode.value, correct, len(gold))

    return DocumentAlignment(
        mode=mode,
        top_n=top_n,
        pairs=pairs,
        similarities=[s for _, _, s in formed],
        accuracy=accuracy,
        correct=correct,
        unpaired_a=[d for d in ids_a if d not in paired_a],
        unpaired_b=[d for d in ids_b if d not in paired_b],
    )
