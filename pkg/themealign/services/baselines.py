"""
Paragraph-clustering baselines

Both similarity baselines pair paragraphs across the two collections
greedily: the most similar cross-language pair above the threshold is
merged first, each paragraph joins at most one pair, and every paragraph
left over stays a singleton cluster. The clusters are then evaluated like
assigned topics.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.metrics.pairwise import cosine_similarity

from ..errors import TranslationTableError
from ..schemas.alignment import AlignmentScope, BaselineKind, BaselineResult
from ..schemas.corpus import Corpus, ParagraphKey, Token
from .alignment import evaluate_alignment

logger = logging.getLogger(__name__)

TranslationTable = Dict[str, Dict[str, float]]


def _identity(tokens: List[str]) -> List[str]:
    return tokens


def count_matrix(documents: Sequence[List[str]]) -> sparse.csr_matrix:
    """Raw term counts, one row per token list, columns in sorted term order"""
    if not any(documents):
        return sparse.csr_matrix((len(documents), 0))
    counts = CountVectorizer(analyzer=_identity, lowercase=False).fit_transform(documents)
    return sparse.csr_matrix(counts, dtype=float)


def _idf_weighted(counts: sparse.csr_matrix) -> sparse.csr_matrix:
    df = np.bincount(counts.indices, minlength=counts.shape[1])
    idf = np.log(counts.shape[0] / np.maximum(df, 1))
    return sparse.csr_matrix(counts @ sparse.diags(idf))


def tfidf_matrix(documents: Sequence[List[str]]) -> sparse.csr_matrix:
    """
    Rows of tf * idf weights

    tf is the raw count of a term in the row, idf = log(N / df) over the N
    given rows. Terms present in every row get weight 0.
    """
    return _idf_weighted(count_matrix(documents))


def greedy_pairs(
    similarity: np.ndarray, threshold: Optional[float] = None
) -> List[Tuple[int, int, float]]:
    """
    Greedy one-to-one pairing, most similar first

    Ties are taken in row, then column order. With a threshold only pairs
    scoring strictly above it are eligible; without one every row is paired
    while columns remain.

    Returns:
        (row, column, similarity) in the order the pairs were formed
    """
    similarity = np.asarray(similarity, dtype=float)
    rows, cols = np.nonzero(similarity > threshold) if threshold is not None else np.indices(
        similarity.shape
    ).reshape(2, -1)
    scores = similarity[rows, cols]
    order = np.lexsort((cols, rows, -scores))

    used_rows, used_cols = set(), set()
    pairs = []
    for position in order:
        i, j = int(rows[position]), int(cols[position])
        if i in used_rows or j in used_cols:
            continue
        used_rows.add(i)
        used_cols.add(j)
        pairs.append((i, j, float(scores[position])))
    return pairs


def _paragraph_keys(corpus: Corpus) -> List[ParagraphKey]:
    return [(d.id, p.id) for _, d, _, p in corpus.iter_paragraphs()]


def _paragraph_tokens(corpus: Corpus, keep: Callable[[Token], bool]) -> List[List[str]]:
    return [[t.key for t in p.tokens if keep(t)] for _, _, _, p in corpus.iter_paragraphs()]


def _clusters(
    keys_a: List[ParagraphKey], keys_b: List[ParagraphKey], pairs: List[Tuple[int, int, float]]
) -> List[List[ParagraphKey]]:
    paired_a = {i for i, _, _ in pairs}
    paired_b = {j for _, j, _ in pairs}
    clusters = [[keys_a[i], keys_b[j]] for i, j, _ in pairs]
    clusters += [[key] for i, key in enumerate(keys_a) if i not in paired_a]
    clusters += [[key] for j, key in enumerate(keys_b) if j not in paired_b]
    return clusters


def _evaluate(
    clusters: List[List[ParagraphKey]],
    corpora: Sequence[Corpus],
    heading_map: Optional[Dict[str, str]],
):
    headings: Dict[ParagraphKey, str] = {}
    for corpus in corpora:
        headings.update(corpus.headings())
    if not headings:
        return None
    assignments = {key: c for c, cluster in enumerate(clusters) for key in cluster}
    scope = AlignmentScope.BILINGUAL if len(corpora) > 1 else AlignmentScope.MONOLINGUAL
    return evaluate_alignment(assignments, headings, scope, heading_map)


def concept_similarity(corpus_a: Corpus, corpus_b: Corpus) -> np.ndarray:
    """
    Cosine of concept tf-idf vectors, idf over the paragraphs of both collections

    A paragraph whose concepts all occur in every paragraph has a zero
    tf-idf vector. Two such paragraphs, both with concepts, are compared on
    raw counts instead, so identical concept multisets still score 1.
    """
    rows = _paragraph_tokens(corpus_a, lambda t: t.is_concept) + _paragraph_tokens(
        corpus_b, lambda t: t.is_concept
    )
    counts = count_matrix(rows)
    split = corpus_a.num_paragraphs
    if counts.shape[1] == 0:
        return np.zeros((split, corpus_b.num_paragraphs))
    weighted = _idf_weighted(counts)
    similarity = cosine_similarity(weighted[:split], weighted[split:], dense_output=False).toarray()

    unweighted = (np.asarray(abs(weighted).sum(axis=1)).ravel() == 0) & (counts.getnnz(axis=1) > 0)
    fallback = np.outer(unweighted[:split], unweighted[split:])
    if fallback.any():
        raw = cosine_similarity(counts[:split], counts[split:], dense_output=False).toarray()
        similarity[fallback] = raw[fallback]
        logger.debug("compared %d paragraph pairs on raw concept counts", int(fallback.sum()))
    return similarity


def tfidf_concept_baseline(
    corpus_a: Corpus,
    corpus_b: Corpus,
    threshold: float = 0.5,
    heading_map: Optional[Dict[str, str]] = None,
) -> BaselineResult:
    """
    Concept tf-idf baseline

    Args:
        corpus_a: Concept-annotated first collection
        corpus_b: Concept-annotated second collection
        threshold: Minimum cosine (exclusive) for a cross-language pair
        heading_map: Heading translation applied before evaluation

    Returns:
        Clusters and, when gold headings exist, their evaluation
    """
    pairs = greedy_pairs(concept_similarity(corpus_a, corpus_b), threshold)
    clusters = _clusters(_paragraph_keys(corpus_a), _paragraph_keys(corpus_b), pairs)
    logger.info("concept baseline: %d pairs above %.3f, %d clusters", len(pairs), threshold, len(clusters))
    return BaselineResult(
        kind=BaselineKind.CONCEPTS,
        threshold=threshold,
        clusters=clusters,
        report=_evaluate(clusters, [corpus_a, corpus_b], heading_map),
    )


def load_translation_table(path: Path) -> TranslationTable:
    """
    Read ``src_word<TAB>tgt_word<TAB>prob`` lines

    Raises:
        TranslationTableError: empty table, unreadable rows or probabilities outside [0, 1]
    """
    try:
        frame = pd.read_csv(
            path, sep="\t", header=None, names=["source", "target", "prob"],
            dtype={"source": str, "target": str}, keep_default_na=False,
        )
    except pd.errors.EmptyDataError as e:
        raise TranslationTableError(f"translation table {path} is empty") from e
    except (ValueError, pd.errors.ParserError) as e:
        raise TranslationTableError(f"cannot parse translation table {path}: {e}") from e

    frame["prob"] = pd.to_numeric(frame["prob"], errors="coerce")
    if frame.empty:
        raise TranslationTableError(f"translation table {path} is empty")
    if frame["prob"].isna().any() or not frame["prob"].between(0.0, 1.0).all():
        raise TranslationTableError(f"translation table {path} has probabilities outside [0, 1]")

    table: TranslationTable = {}
    for source, target, prob in zip(
        frame["source"].str.casefold(), frame["target"].str.casefold(), frame["prob"]
    ):
        entries = table.setdefault(source, {})
        entries[target] = max(entries.get(target, 0.0), float(prob))
    logger.info("loaded translation table: %d source words, %d entries", len(table), len(frame))
    return table


def translation_similarity(
    corpus_a: Corpus,
    corpus_b: Corpus,
    table: TranslationTable,
    threads: int = 1,
) -> np.ndarray:
    """
    sim(A, B) = (1/|A|) * sum over tokens u of A of max over v in B of p(v | u)

    Raises:
        TranslationTableError: empty table
    """
    if not table:
        raise TranslationTableError("translation table is empty")

    rows_b = _paragraph_tokens(corpus_b, lambda t: True)
    containing: Dict[str, List[int]] = {}
    for j, tokens in enumerate(rows_b):
        for key in set(tokens):
            containing.setdefault(key, []).append(j)
    num_b = len(rows_b)

    def score(tokens: List[str]) -> np.ndarray:
        row = np.zeros(num_b)
        for u, count in Counter(tokens).items():
            best = np.zeros(num_b)
            for v, prob in table.get(u, {}).items():
                for j in containing.get(v, ()):
                    if prob > best[j]:
                        best[j] = prob
            row += count * best
        return row / len(tokens)

    rows_a = _paragraph_tokens(corpus_a, lambda t: True)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scored = list(pool.map(score, rows_a))
    else:
        scored = [score(tokens) for tokens in rows_a]
    return np.vstack(scored) if scored else np.zeros((0, num_b))


def translation_table_baseline(
    corpus_a: Corpus,
    corpus_b: Corpus,
    table: TranslationTable,
    threshold: float = 0.5,
    heading_map: Optional[Dict[str, str]] = None,
    threads: int = 1,
) -> BaselineResult:
    """Translation-probability baseline, clustered like the concept baseline"""
    similarity = translation_similarity(corpus_a, corpus_b, table, threads)
    pairs = greedy_pairs(similarity, threshold)
    clusters = _clusters(_paragraph_keys(corpus_a), _paragraph_keys(corpus_b), pairs)
    logger.info("translation baseline: %d pairs above %.3f, %d clusters", len(pairs), threshold, len(clusters))
    return BaselineResult(
        kind=BaselineKind.TTABLE,
        threshold=threshold,
        clusters=clusters,
        report=_evaluate(clusters, [corpus_a, corpus_b], heading_map),
    )


def singleton_baseline(
    corpus_a: Corpus,
    corpus_b: Optional[Corpus] = None,
    heading_map: Optional[Dict[str, str]] = None,
) -> BaselineResult:
    """Every paragraph its own cluster"""
    corpora = [corpus_a] if corpus_b is None else [corpus_a, corpus_b]
    clusters = [[key] for corpus in corpora for key in _paragraph_keys(corpus)]
    return BaselineResult(
        kind=BaselineKind.SINGLETON,
        clusters=clusters,
        report=_evaluate(clusters, corpora, heading_map),
    )
