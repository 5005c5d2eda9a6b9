"""
Concept annotation service

Locates lexicalizations of concepts in the text, builds one disambiguation
instance per paragraph (or per document), selects one concept per mention
by maximum edge-weighted selection and replaces every matched span by a
single concept token.
"""

import csv
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.clique import DEFAULT_MAX_SEARCH_SPACE, solve_max_weight_selection
from ..core.relations import RelationGraph
from ..errors import InstanceTooLargeError, LexiconError
from ..schemas.concepts import (
    ConceptCandidate,
    ConceptLexicon,
    DisambiguationInstance,
    DisambiguationScope,
    MentionPartition,
    SolverMode,
)
from ..schemas.corpus import Corpus, Document, Paragraph, Token

logger = logging.getLogger(__name__)

# Edge weight = RELATION_SHARE * relatedness + (1 - RELATION_SHARE) * mean prior
RELATION_SHARE = 0.8


def load_lexicon(path: Path) -> ConceptLexicon:
    """
    Read a ``surface_form<TAB>conceptId<TAB>prior`` lexicon

    Surface forms are case-folded and whitespace-normalized so that they
    match token sequences of the corpus.

    Raises:
        LexiconError: unreadable rows, duplicate entries or inconsistent priors
    """
    try:
        df = pd.read_csv(
            path,
            sep="\t",
            header=None,
            names=["surface", "concept_id", "prior"],
            dtype={"surface": str, "concept_id": str},
            quoting=csv.QUOTE_NONE,
            keep_default_na=False,
            comment=None,
        )
    except pd.errors.EmptyDataError:
        logger.warning("lexicon %s is empty", path)
        return ConceptLexicon()
    except (ValueError, pd.errors.ParserError) as e:
        raise LexiconError(f"cannot parse lexicon {path}: {e}") from e

    df["surface"] = df["surface"].map(lambda s: " ".join(str(s).casefold().split()))
    df["prior"] = pd.to_numeric(df["prior"], errors="coerce")
    if df["prior"].isna().any() or (df["surface"] == "").any():
        bad = int(df.index[df["prior"].isna() | (df["surface"] == "")][0]) + 1
        raise LexiconError(f"lexicon {path}, row {bad}: missing surface form or prior")
    duplicated = df.duplicated(subset=["surface", "concept_id"])
    if duplicated.any():
        row = df[duplicated].iloc[0]
        raise LexiconError(f"duplicate lexicon entry ({row['surface']}, {row['concept_id']})")

    entries: Dict[str, List[ConceptCandidate]] = {}
    try:
        for surface, group in df.groupby("surface", sort=True):
            entries[surface] = [
                ConceptCandidate(concept_id=c, prior=float(p))
                for c, p in zip(group["concept_id"], group["prior"])
            ]
        lexicon = ConceptLexicon(entries=entries)
    except ValueError as e:
        raise LexiconError(f"invalid lexicon {path}: {e}") from e

    logger.info("loaded lexicon: %d surface forms, longest %d tokens", len(lexicon), lexicon.max_span)
    return lexicon


def match_mentions(paragraph: Paragraph, lexicon: ConceptLexicon) -> List[MentionPartition]:
    """
    Greedy longest-match, left to right

    Spans never include tokens that already are concepts.

    Args:
        paragraph: Paragraph to scan
        lexicon: Surface forms and their candidates

    Returns:
        Non-overlapping mentions in text order
    """
    tokens = paragraph.tokens
    mentions: List[MentionPartition] = []
    i = 0
    while i < len(tokens):
        if tokens[i].is_concept:
            i += 1
            continue
        matched = 0
        for length in range(min(lexicon.max_span, len(tokens) - i), 0, -1):
            span = tokens[i:i + length]
            if any(t.is_concept for t in span):
                continue
            surface = " ".join(t.surface for t in span)
            candidates = lexicon.candidates(surface)
            if candidates:
                mentions.append(
                    MentionPartition(
                        paragraph_id=paragraph.id,
                        start=i,
                        end=i + length,
                        surface=surface,
                        candidates=candidates,
                    )
                )
                matched = length
                break
        i += matched or 1
    return mentions


def build_instance(
    partitions: List[MentionPartition],
    graph: Optional[RelationGraph] = None,
) -> DisambiguationInstance:
    """
    Complete n-partite graph over the mentions' candidates

    Edge weight between candidates u and v of different mentions:
    ``0.8 * relatedness(u, v) + 0.2 * (prior(u) + prior(v)) / 2``, where
    relatedness is the relation-graph weight if the concepts are linked, the
    Jaccard overlap of their neighborhoods otherwise, and 1 for the same concept.
    """
    weights: Dict[Tuple[int, int], np.ndarray] = {}
    for i, k in itertools.combinations(range(len(partitions)), 2):
        left, right = partitions[i].candidates, partitions[k].candidates
        matrix = np.zeros((len(left), len(right)))
        for a, u in enumerate(left):
            for b, v in enumerate(right):
                if graph is not None:
                    related = graph.relatedness(u.concept_id, v.concept_id)
                else:
                    related = 1.0 if u.concept_id == v.concept_id else 0.0
                matrix[a, b] = (
                    RELATION_SHARE * related
                    + (1.0 - RELATION_SHARE) * (u.prior + v.prior) / 2.0
                )
        weights[(i, k)] = matrix
    return DisambiguationInstance(partitions=partitions, weights=weights)


class ConceptAnnotator:
    """
    Replace matched terms with disambiguated concept IDs

    Each scope unit (paragraph or document) forms one disambiguation
    instance. Exact instances over budget fall back to the greedy solver
    unless ``greedy_fallback`` is disabled.
    """

    def __init__(
        self,
        lexicon: ConceptLexicon,
        graph: Optional[RelationGraph] = None,
        scope: DisambiguationScope = DisambiguationScope.PARAGRAPH,
        mode: SolverMode = SolverMode.EXACT,
        greedy_fallback: bool = True,
        max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
    ):
        self.lexicon = lexicon
        self.graph = graph
        self.scope = scope
        self.mode = mode
        self.greedy_fallback = greedy_fallback
        self.max_search_space = max_search_space
        self.stats = {
            "mentions": 0,
            "instances": 0,
            "greedy_fallbacks": 0,
        }

    def annotate_corpus(self, corpus: Corpus, threads: int = 1) -> Corpus:
        """
        Annotate every document; output order equals input order

        Args:
            corpus: Corpus to annotate
            threads: Worker cap for per-document annotation

        Returns:
            New corpus with concept tokens in place of matched spans
        """
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(self._annotate_document, corpus.documents))
        else:
            results = [self._annotate_document(d) for d in corpus.documents]

        documents = []
        for document, counts in results:
            documents.append(document)
            for key, value in counts.items():
                self.stats[key] += value

        logger.info(
            "annotated %d documents: %d mentions in %d instances, %d greedy fallbacks",
            len(documents), self.stats["mentions"], self.stats["instances"],
            self.stats["greedy_fallbacks"],
        )
        return Corpus(documents=documents, languages=list(corpus.languages))

    def annotate_document(self, document: Document) -> Document:
        return self._annotate_document(document)[0]

    def _annotate_document(self, document: Document) -> Tuple[Document, Dict[str, int]]:
        counts = {"mentions": 0, "instances": 0, "greedy_fallbacks": 0}
        mentions = {p.id: match_mentions(p, self.lexicon) for p in document.paragraphs}

        if self.scope == DisambiguationScope.DOCUMENT:
            units = [[m for p in document.paragraphs for m in mentions[p.id]]]
        else:
            units = [mentions[p.id] for p in document.paragraphs]

        chosen: Dict[str, Dict[int, MentionPartition]] = {p.id: {} for p in document.paragraphs}
        resolved: Dict[Tuple[str, int], str] = {}
        for partitions in units:
            if not partitions:
                continue
            concept_ids, fell_back = self._disambiguate(partitions)
            counts["instances"] += 1
            counts["mentions"] += len(partitions)
            counts["greedy_fallbacks"] += int(fell_back)
            for partition, concept_id in zip(partitions, concept_ids):
                chosen[partition.paragraph_id][partition.start] = partition
                resolved[(partition.paragraph_id, partition.start)] = concept_id

        paragraphs = []
        for paragraph in document.paragraphs:
            spans = chosen[paragraph.id]
            if not spans:
                paragraphs.append(paragraph)
                continue
            tokens: List[Token] = []
            i = 0
            while i < len(paragraph.tokens):
                if i in spans:
                    tokens.append(Token.concept(resolved[(paragraph.id, i)]))
                    i = spans[i].end
                else:
                    tokens.append(paragraph.tokens[i])
                    i += 1
            paragraphs.append(paragraph.model_copy(update={"tokens": tokens}))

        return document.model_copy(update={"paragraphs": paragraphs}), counts

    def _disambiguate(self, partitions: List[MentionPartition]) -> Tuple[List[str], bool]:
        instance = build_instance(partitions, self.graph)
        try:
            result = solve_max_weight_selection(instance, self.mode, self.max_search_space)
            return result.concept_ids, False
        except InstanceTooLargeError as e:
            if not self.greedy_fallback:
                raise
            logger.debug("falling back to greedy selection: %s", e)
            result = solve_max_weight_selection(instance, SolverMode.GREEDY)
            return result.concept_ids, True


def annotate_corpus(
    corpus: Corpus,
    lexicon: ConceptLexicon,
    graph: Optional[RelationGraph] = None,
    scope: DisambiguationScope = DisambiguationScope.PARAGRAPH,
    mode: SolverMode = SolverMode.EXACT,
    greedy_fallback: bool = True,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
    threads: int = 1,
) -> Corpus:
    """
    Convenience function to annotate a corpus with concept IDs

    Args:
        corpus: Corpus to annotate
        lexicon: Surface form -> candidate concepts
        graph: Concept relations used for edge weights
        scope: One disambiguation instance per paragraph or per document
        mode: Exact or greedy selection
        greedy_fallback: Use greedy selection for instances over the exact budget
        max_search_space: Exact-mode budget
        threads: Worker cap

    Returns:
        Annotated corpus
    """
    annotator = ConceptAnnotator(lexicon, graph, scope, mode, greedy_fallback, max_search_space)
    return annotator.annotate_corpus(corpus, threads=threads)
