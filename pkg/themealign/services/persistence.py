"""
Model and assignment files

The model file is a single JSON document holding the training corpus (as
vocabulary indices), both layers' hyperparameters and assignments, and
their count tables in sparse form. Keys are sorted and nothing
time-dependent is written, so identical runs give identical bytes. Loading
rebuilds every table from the assignments and refuses files whose stored
tables disagree with the rebuild.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping

import numpy as np
from pydantic import ValidationError

from ..core.lda2 import EncodedCorpus, WTopicState, token_g
from ..core.theme_hmm import ThemeState
from ..errors import ModelFormatError
from ..schemas.corpus import Corpus, Document, Paragraph, Token, Vocabulary
from ..schemas.model import ThemeHyper, WTopicHyper
from .corpus_loader import build_frequency_tables
from .training import TrainedModel

logger = logging.getLogger(__name__)

MODEL_FORMAT = "themealign-model"
MODEL_VERSION = 1


def _sparse(counts: np.ndarray) -> Dict[str, int]:
    return {str(int(i)): int(counts[i]) for i in np.flatnonzero(counts)}


def _wtopic_counts(state: WTopicState) -> Dict[str, Any]:
    return {
        "background": _sparse(state.n_background),
        "theme": _sparse(state.n_theme),
        "document": {
            doc_id: _sparse(state.n_doc[d]) for d, doc_id in enumerate(state.encoded.doc_ids)
        },
    }


def _theme_counts(state: ThemeState) -> Dict[str, Any]:
    return {
        "topic_word": [_sparse(row) for row in state.topic_word],
        "doc_topic": {
            doc_id: [int(c) for c in state.doc_topic[d]]
            for d, doc_id in enumerate(state.encoded.doc_ids)
        },
        "trans": [[int(c) for c in row] for row in state.trans],
        "initial": [int(c) for c in state.initial],
    }


def model_to_record(model: TrainedModel) -> Dict[str, Any]:
    """JSON-serializable form of a trained model"""
    wstate = model.wstate
    encoded = wstate.encoded
    documents = []
    for d, document in enumerate(model.corpus.documents):
        paragraphs = []
        for t, paragraph in zip(encoded.doc_paragraphs(d), document.paragraphs):
            span = encoded.paragraph_slice(t)
            record: Dict[str, Any] = {
                "id": paragraph.id,
                "tokens": [int(w) for w in encoded.words[span]],
                "wtopics": [int(s) for s in wstate.s[span]],
            }
            if paragraph.heading is not None:
                record["heading"] = paragraph.heading
            paragraphs.append(record)
        documents.append(
            {"id": document.id, "lang": document.lang, "title": document.title,
             "paragraphs": paragraphs}
        )

    theme = None
    if model.tstate is not None:
        theme = {
            "hyper": model.tstate.hyper.model_dump(mode="json"),
            "z": {
                doc_id: model.tstate.document_topics(d)
                for d, doc_id in enumerate(encoded.doc_ids)
            },
            "counts": _theme_counts(model.tstate),
        }

    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "config_hash": model.config_hash,
        "languages": list(model.corpus.languages),
        "vocabulary": list(model.vocab.words),
        "documents": documents,
        "wtopic": {"hyper": wstate.hyper.model_dump(mode="json"), "counts": _wtopic_counts(wstate)},
        "theme": theme,
    }


def save_model(model: TrainedModel, path: Path) -> None:
    """Write the model JSON (sorted keys, compact separators)"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_record(model), f, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        f.write("\n")
    logger.info("saved model %s (config %s)", path, model.config_hash[:12])


def model_from_record(record: Mapping[str, Any]) -> TrainedModel:
    """
    Rebuild a trained model and verify its stored tables

    Raises:
        ModelFormatError: unknown format, malformed content or inconsistent tables
    """
    if record.get("format") != MODEL_FORMAT or record.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"not a {MODEL_FORMAT} v{MODEL_VERSION} file "
            f"(format={record.get('format')!r}, version={record.get('version')!r})"
        )
    try:
        vocab = Vocabulary(words=record["vocabulary"])
        documents = []
        wtopics: List[int] = []
        for doc in record["documents"]:
            paragraphs = []
            for par in doc["paragraphs"]:
                if len(par["tokens"]) != len(par["wtopics"]):
                    raise ModelFormatError(f"paragraph '{doc['id']}/{par['id']}' is truncated")
                paragraphs.append(
                    Paragraph(
                        id=par["id"],
                        heading=par.get("heading"),
                        tokens=[Token.from_raw(vocab.word(w)) for w in par["tokens"]],
                    )
                )
                wtopics.extend(par["wtopics"])
            documents.append(
                Document(id=doc["id"], lang=doc["lang"], title=doc.get("title", ""),
                         paragraphs=paragraphs)
            )
        corpus = Corpus(documents=documents, languages=record.get("languages", []))

        tables = build_frequency_tables(corpus, vocab)
        encoded = EncodedCorpus.from_corpus(corpus, vocab)
        wtopic_hyper = WTopicHyper(**record["wtopic"]["hyper"])
        wstate = WTopicState(
            encoded, wtopic_hyper, token_g(encoded, tables), np.array(wtopics, dtype=np.int64)
        )
        if _wtopic_counts(wstate) != record["wtopic"]["counts"]:
            raise ModelFormatError("stored w-topic counts disagree with the assignments")

        tstate = None
        theme = record.get("theme")
        if theme is not None:
            theme_hyper = ThemeHyper(**theme["hyper"])
            z = np.array(
                [j for doc_id in encoded.doc_ids for j in theme["z"][doc_id]], dtype=np.int64
            )
            mask = wstate.theme_mask()
            theme_words = [
                encoded.words[encoded.paragraph_slice(t)][mask[encoded.paragraph_slice(t)]]
                for t in range(encoded.num_paragraphs)
            ]
            tstate = ThemeState(encoded, theme_hyper, theme_words, z)
            if _theme_counts(tstate) != theme["counts"]:
                raise ModelFormatError("stored theme counts disagree with the assignments")
    except (KeyError, TypeError, IndexError, ValueError, ValidationError) as e:
        raise ModelFormatError(f"malformed model: {e}") from e

    model = TrainedModel(corpus, vocab, tables, wstate, tstate)
    if record.get("config_hash") != model.config_hash:
        raise ModelFormatError("config hash does not match the stored hyperparameters")
    return model


def load_model(path: Path) -> TrainedModel:
    """Read and verify a model file"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            record = json.load(f)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"model {path} is not valid JSON: {e.msg}") from e
    if not isinstance(record, dict):
        raise ModelFormatError(f"model {path} is not a JSON object")
    model = model_from_record(record)
    logger.info("loaded model %s: %d documents, W=%d", path, len(model.corpus), model.vocab.size)
    return model


def dump_assignments(topics: Mapping[str, List[int]], path: Path) -> None:
    """One ``{"doc": id, "topics": [...]}`` line per document"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for doc_id, sequence in topics.items():
            f.write(json.dumps({"doc": doc_id, "topics": [int(j) for j in sequence]}, ensure_ascii=False))
            f.write("\n")


def load_assignments(path: Path) -> Dict[str, List[int]]:
    """Read a decode output file"""
    topics: Dict[str, List[int]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                topics[str(record["doc"])] = [int(j) for j in record["topics"]]
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise ModelFormatError(f"{path}, line {line_number}: malformed assignment ({e})") from e
    return topics
