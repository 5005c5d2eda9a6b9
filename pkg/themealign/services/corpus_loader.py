"""Corpus ingestion: JSONL loading, vocabularies and occurrence statistics"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..errors import CorpusParseError, CorpusValidationError
from ..schemas.corpus import (
    Corpus,
    CorpusStats,
    Document,
    FrequencyTables,
    Paragraph,
    Token,
    Vocabulary,
)

logger = logging.getLogger(__name__)


class CorpusLoader:
    """
    Load a pre-tokenized corpus, one JSON document per line

    Expected line structure:
        {"id": "...", "lang": "en", "title": "...",
         "paragraphs": [{"id": "p1", "heading": "history", "tokens": ["in", "c7954681"]}]}

    Tokens matching ``c<digits>`` become concept tokens, everything else is
    a case-folded word. Blank lines are skipped.
    """

    def __init__(self, languages: Optional[List[str]] = None):
        self.languages = languages
        self.stats = {
            "documents": 0,
            "paragraphs": 0,
            "blank_lines": 0,
        }
        self._tokens: Dict[str, Token] = {}

    def load(self, path: Path) -> Corpus:
        """
        Parse and validate a corpus file

        Args:
            path: JSONL corpus file

        Returns:
            Validated corpus, paragraph order preserved

        Raises:
            CorpusParseError: malformed line (carries the line number)
            CorpusValidationError: duplicate ids, empty paragraphs, undeclared languages
        """
        documents: List[Document] = []
        seen_ids: Dict[str, int] = {}

        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    self.stats["blank_lines"] += 1
                    continue
                document = self._parse_line(line, line_number)
                if document.id in seen_ids:
                    raise CorpusValidationError(
                        f"line {line_number}: duplicate document id '{document.id}' "
                        f"(first seen on line {seen_ids[document.id]})"
                    )
                seen_ids[document.id] = line_number
                documents.append(document)
                self.stats["documents"] += 1
                self.stats["paragraphs"] += len(document.paragraphs)

        languages = self.languages or sorted({d.lang for d in documents})
        undeclared = sorted({d.lang for d in documents} - set(languages))
        if undeclared:
            raise CorpusValidationError(f"undeclared document languages: {undeclared}")

        logger.info(
            "loaded %d documents, %d paragraphs from %s",
            self.stats["documents"], self.stats["paragraphs"], path,
        )
        return Corpus(documents=documents, languages=languages)

    def _parse_line(self, line: str, line_number: int) -> Document:
        """Parse a single JSONL record into a Document"""
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusParseError(f"invalid JSON ({e.msg})", line_number) from e

        if not isinstance(record, dict):
            raise CorpusParseError("record is not a JSON object", line_number)
        for field in ("id", "lang", "paragraphs"):
            if field not in record:
                raise CorpusParseError(f"missing field '{field}'", line_number)
        if not isinstance(record["paragraphs"], list):
            raise CorpusParseError("'paragraphs' is not a list", line_number)
        if not record["paragraphs"]:
            raise CorpusValidationError(
                f"line {line_number}: document '{record['id']}' has no paragraphs"
            )

        paragraphs = []
        paragraph_ids = set()
        for position, raw in enumerate(record["paragraphs"]):
            paragraph = self._parse_paragraph(raw, position, line_number)
            if paragraph.id in paragraph_ids:
                raise CorpusValidationError(
                    f"line {line_number}: duplicate paragraph id '{paragraph.id}'"
                )
            paragraph_ids.add(paragraph.id)
            paragraphs.append(paragraph)

        try:
            return Document(
                id=str(record["id"]),
                lang=str(record["lang"]),
                title=str(record.get("title", "")),
                paragraphs=paragraphs,
            )
        except ValueError as e:
            raise CorpusParseError(str(e), line_number) from e

    def _parse_paragraph(self, raw: Any, position: int, line_number: int) -> Paragraph:
        if not isinstance(raw, dict) or not isinstance(raw.get("tokens"), list):
            raise CorpusParseError(f"paragraph {position} lacks a token list", line_number)
        if not raw["tokens"]:
            raise CorpusValidationError(
                f"line {line_number}: empty paragraph '{raw.get('id', position)}'"
            )
        try:
            tokens = [self._token(str(t)) for t in raw["tokens"]]
            heading = raw.get("heading")
            return Paragraph(
                id=str(raw.get("id", f"p{position + 1}")),
                heading=str(heading) if heading is not None else None,
                tokens=tokens,
            )
        except ValueError as e:
            raise CorpusParseError(f"paragraph {position}: {e}", line_number) from e

    def _token(self, raw: str) -> Token:
        # Tokens are immutable, so identical strings share one instance
        token = self._tokens.get(raw)
        if token is None:
            token = Token.from_raw(raw)
            self._tokens[raw] = token
        return token


def load_corpus(path: Path, languages: Optional[List[str]] = None) -> Corpus:
    """
    Convenience function to load a corpus file

    Args:
        path: JSONL corpus file
        languages: Declared languages; defaults to the languages found in the file

    Returns:
        Validated corpus
    """
    return CorpusLoader(languages).load(path)


def document_to_record(document: Document) -> Dict[str, Any]:
    """Serializable JSONL record of a document"""
    paragraphs = []
    for paragraph in document.paragraphs:
        record: Dict[str, Any] = {"id": paragraph.id}
        if paragraph.heading is not None:
            record["heading"] = paragraph.heading
        record["tokens"] = [token.key for token in paragraph.tokens]
        paragraphs.append(record)
    return {
        "id": document.id,
        "lang": document.lang,
        "title": document.title,
        "paragraphs": paragraphs,
    }


def dump_corpus(corpus: Corpus, path: Path) -> None:
    """Write a corpus back to the JSONL format"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for document in corpus.documents:
            f.write(json.dumps(document_to_record(document), ensure_ascii=False))
            f.write("\n")


def concatenate(first: Corpus, second: Corpus) -> Corpus:
    """
    Bilingual training corpus: documents of both collections, in order

    Raises:
        CorpusValidationError: a document id occurs in both collections
    """
    clashes = sorted({d.id for d in first.documents} & {d.id for d in second.documents})
    if clashes:
        raise CorpusValidationError(f"document ids shared by both corpora: {clashes[:5]}")
    languages = list(dict.fromkeys(first.languages + second.languages))
    return Corpus(documents=first.documents + second.documents, languages=languages)


def build_vocabulary(*corpora: Corpus) -> Vocabulary:
    """
    Vocabulary over the union of corpora, in first-occurrence order

    Concept IDs are shared keys across languages; plain words collide only on
    identical strings.
    """
    index: Dict[str, int] = {}
    for corpus in corpora:
        for _, _, _, paragraph in corpus.iter_paragraphs():
            for token in paragraph.tokens:
                if token.key not in index:
                    index[token.key] = len(index)
    return Vocabulary(words=list(index))


def build_frequency_tables(corpus: Corpus, vocab: Optional[Vocabulary] = None) -> FrequencyTables:
    """
    Paragraph / document / collection occurrence counts

    A word occurring several times in one paragraph counts once for that paragraph.

    Args:
        corpus: Non-empty corpus
        vocab: Vocabulary indexing the tables; built from the corpus when omitted

    Returns:
        Frequency tables over ``vocab``
    """
    if not corpus.documents:
        raise CorpusValidationError("cannot count an empty corpus")
    vocab = vocab or build_vocabulary(corpus)

    num_docs = len(corpus.documents)
    doc_par_df = np.zeros((num_docs, vocab.size), dtype=np.int64)
    paragraphs_in_doc = np.zeros(num_docs, dtype=np.int64)

    for d, document, _, paragraph in corpus.iter_paragraphs():
        ids = vocab.encode(paragraph.tokens)
        present = np.unique(ids[ids >= 0])
        doc_par_df[d, present] += 1
        paragraphs_in_doc[d] += 1

    return FrequencyTables(
        doc_ids=[d.id for d in corpus.documents],
        par_df=doc_par_df.sum(axis=0),
        doc_par_df=doc_par_df,
        doc_df=(doc_par_df > 0).sum(axis=0),
        paragraphs_in_doc=paragraphs_in_doc,
        total_paragraphs=int(paragraphs_in_doc.sum()),
        total_docs=num_docs,
    )


def corpus_statistics(corpus: Corpus) -> CorpusStats:
    """Document, paragraph, token and vocabulary counts"""
    keys = set()
    concepts = set()
    for _, _, _, paragraph in corpus.iter_paragraphs():
        for token in paragraph.tokens:
            keys.add(token.key)
            if token.is_concept:
                concepts.add(token.key)
    return CorpusStats(
        documents=len(corpus.documents),
        paragraphs=corpus.num_paragraphs,
        tokens=corpus.num_tokens,
        vocabulary=len(keys),
        word_vocabulary=len(keys) - len(concepts),
        concept_vocabulary=len(concepts),
        languages=list(corpus.languages),
    )


