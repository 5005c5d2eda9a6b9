"""Model training and decoding: the w-topic layer, then the theme layer on its output"""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional

from ..config.settings import PipelineConfig
from ..core.lda2 import WTopicState, infer_wtopics, run_wtopic_sampler
from ..core.relations import RelationGraph
from ..core.theme_hmm import (
    ThemeDecoder,
    ThemeState,
    run_theme_sampler,
    theme_diagnostics,
    theme_keys,
)
from ..schemas.corpus import Corpus, Document, FrequencyTables, Vocabulary
from ..schemas.model import ThemeDiagnostics, ThemeHyper, WTopicHyper
from .corpus_loader import build_frequency_tables, build_vocabulary

logger = logging.getLogger(__name__)


def config_hash(wtopic_hyper: WTopicHyper, theme_hyper: Optional[ThemeHyper]) -> str:
    """sha256 of the canonical hyperparameter JSON"""
    payload = {
        "wtopic": wtopic_hyper.model_dump(mode="json"),
        "theme": theme_hyper.model_dump(mode="json") if theme_hyper is not None else None,
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class TrainedModel:
    """Training corpus, its statistics and both sampler states"""

    def __init__(
        self,
        corpus: Corpus,
        vocab: Vocabulary,
        tables: FrequencyTables,
        wstate: WTopicState,
        tstate: Optional[ThemeState] = None,
    ):
        self.corpus = corpus
        self.vocab = vocab
        self.tables = tables
        self.wstate = wstate
        self.tstate = tstate

    @property
    def config_hash(self) -> str:
        return config_hash(self.wstate.hyper, self.tstate.hyper if self.tstate else None)

    def diagnostics(self) -> Optional[ThemeDiagnostics]:
        return theme_diagnostics(self.tstate) if self.tstate is not None else None


def train_model(
    corpus: Corpus,
    config: PipelineConfig,
    graph: Optional[RelationGraph] = None,
    theme_layer: bool = True,
) -> TrainedModel:
    """
    Train both layers on one (possibly concatenated bilingual) corpus

    Args:
        corpus: Training corpus
        config: Pipeline configuration; data-dependent defaults are resolved here
        graph: Concept relations for the topic boost
        theme_layer: Also train the theme layer

    Returns:
        Trained model
    """
    vocab = build_vocabulary(corpus)
    tables = build_frequency_tables(corpus, vocab)
    wtopic_hyper = config.resolve_wtopic_hyper(vocab.size, corpus.num_paragraphs)
    logger.info(
        "training on %d documents, %d paragraphs, W=%d (eta=%.6g, gamma=%.6g)",
        len(corpus), corpus.num_paragraphs, vocab.size, wtopic_hyper.eta, wtopic_hyper.gamma,
    )
    wstate = run_wtopic_sampler(corpus, tables, wtopic_hyper, vocab)

    tstate = None
    if theme_layer:
        theme_hyper = config.resolve_theme_hyper(vocab.size)
        tstate = run_theme_sampler(wstate, theme_hyper, graph)
        theme_diagnostics(tstate)
    return TrainedModel(corpus, vocab, tables, wstate, tstate)


def decode_corpus(
    model: TrainedModel,
    corpus: Corpus,
    graph: Optional[RelationGraph] = None,
    threads: int = 1,
) -> Dict[str, List[int]]:
    """
    Viterbi topics of every document of a corpus

    Training documents reuse their sampled w-topics; other documents get
    w-topics inferred against the frozen model first. A document counts as
    a training document when its id and its paragraph ids both match.

    Args:
        model: Trained model with a theme layer
        corpus: Documents to decode
        graph: Concept relations for the boost
        threads: Worker cap (decoding is read-only on the model)

    Returns:
        Document id -> topic per paragraph, in corpus order
    """
    if model.tstate is None:
        raise ValueError("model has no theme layer to decode with")
    decoder = ThemeDecoder(model.tstate, model.tstate.hyper, graph)

    def decode(document: Document) -> List[int]:
        d = model.wstate.encoded.doc_index(document.id)
        if d is not None and model.wstate.encoded.paragraph_ids[d] != [p.id for p in document.paragraphs]:
            logger.warning(
                "document %s reuses a training id with other paragraphs, decoding it as unseen",
                document.id,
            )
            d = None
        if d is not None:
            return decoder.decode(decoder.training_keys(d), d)
        wtopics = infer_wtopics(document, model.wstate, model.tables)
        return decoder.decode(theme_keys(document, wtopics))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            topics = list(pool.map(decode, corpus.documents))
    else:
        topics = [decode(document) for document in corpus.documents]
    logger.info("decoded %d documents", len(topics))
    return {document.id: t for document, t in zip(corpus.documents, topics)}
