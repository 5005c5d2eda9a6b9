"""
Pydantic schemas for corpora

A corpus is an ordered collection of documents; a document is an ordered
list of paragraphs; a paragraph is an ordered list of tokens. Tokens are
either plain (case-folded) words or language-independent concept IDs.
"""

import re
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    field_validator,
    model_validator,
)

CONCEPT_PATTERN = re.compile(r"^c[0-9]+$")

# (document id, paragraph id)
ParagraphKey = Tuple[str, str]


class TokenKind(str, Enum):
    """Token categories"""
    WORD = "word"
    CONCEPT = "concept"


class Token(BaseModel):
    """A single word or concept occurrence"""

    model_config = ConfigDict(frozen=True)

    surface: str = Field(..., min_length=1)
    kind: TokenKind = TokenKind.WORD
    concept_id: Optional[str] = Field(default=None, description="Concept ID, e.g. c553795")

    @model_validator(mode="after")
    def check_concept_id(self) -> "Token":
        if (self.kind == TokenKind.CONCEPT) != (self.concept_id is not None):
            raise ValueError("concept tokens, and only concept tokens, carry a concept_id")
        if self.concept_id is not None and not CONCEPT_PATTERN.match(self.concept_id):
            raise ValueError(f"malformed concept id '{self.concept_id}'")
        if self.kind == TokenKind.WORD and CONCEPT_PATTERN.match(self.surface):
            raise ValueError(f"word '{self.surface}' collides with concept id syntax")
        return self

    @classmethod
    def from_raw(cls, raw: str) -> "Token":
        """
        Parse a serialized token; concept IDs are kept verbatim, words are case-folded

        A word that would fold into concept ID syntax ("C12") keeps its
        original surface so it never reads back as a concept.
        """
        if CONCEPT_PATTERN.match(raw):
            return cls(surface=raw, kind=TokenKind.CONCEPT, concept_id=raw)
        folded = raw.casefold()
        return cls(surface=raw if CONCEPT_PATTERN.match(folded) else folded)

    @classmethod
    def concept(cls, concept_id: str) -> "Token":
        return cls(surface=concept_id, kind=TokenKind.CONCEPT, concept_id=concept_id)

    @property
    def is_concept(self) -> bool:
        return self.kind == TokenKind.CONCEPT

    @property
    def key(self) -> str:
        """Vocabulary key (concept ID for concepts, folded surface for words)"""
        return self.concept_id if self.concept_id is not None else self.surface


class Paragraph(BaseModel):
    """Ordered token sequence with an optional gold section heading"""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    heading: Optional[str] = Field(default=None, description="Gold section label")
    tokens: List[Token]

    @field_validator("tokens")
    @classmethod
    def check_non_empty(cls, v: List[Token]) -> List[Token]:
        if not v:
            raise ValueError("empty paragraph")
        return v


class Document(BaseModel):
    """A document in one language"""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    lang: str = Field(..., min_length=1)
    title: str = ""
    paragraphs: List[Paragraph]

    @field_validator("paragraphs")
    @classmethod
    def check_paragraphs(cls, v: List[Paragraph]) -> List[Paragraph]:
        if not v:
            raise ValueError("document has no paragraphs")
        seen = set()
        for paragraph in v:
            if paragraph.id in seen:
                raise ValueError(f"duplicate paragraph id '{paragraph.id}'")
            seen.add(paragraph.id)
        return v


class Corpus(BaseModel):
    """Validated, immutable document collection"""

    model_config = ConfigDict(frozen=True)

    documents: List[Document] = Field(default_factory=list)
    languages: List[str] = Field(default_factory=list, description="Declared corpus languages")

    _by_id: Dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def check_documents(self) -> "Corpus":
        by_id: Dict[str, int] = {}
        declared = set(self.languages)
        for position, document in enumerate(self.documents):
            if document.id in by_id:
                raise ValueError(f"duplicate document id '{document.id}'")
            if declared and document.lang not in declared:
                raise ValueError(
                    f"document '{document.id}' has undeclared language '{document.lang}'"
                )
            by_id[document.id] = position
        self._by_id = by_id
        return self

    def __len__(self) -> int:
        return len(self.documents)

    def document(self, doc_id: str) -> Document:
        return self.documents[self._by_id[doc_id]]

    def document_index(self, doc_id: str) -> Optional[int]:
        return self._by_id.get(doc_id)

    @property
    def num_paragraphs(self) -> int:
        return sum(len(d.paragraphs) for d in self.documents)

    @property
    def num_tokens(self) -> int:
        return sum(len(p.tokens) for d in self.documents for p in d.paragraphs)

    def iter_paragraphs(self) -> Iterator[Tuple[int, Document, int, Paragraph]]:
        """Yield (document index, document, paragraph index, paragraph) in corpus order"""
        for d, document in enumerate(self.documents):
            for t, paragraph in enumerate(document.paragraphs):
                yield d, document, t, paragraph

    def headings(self) -> Dict[ParagraphKey, str]:
        """Gold headings of every labeled paragraph"""
        return {
            (document.id, paragraph.id): paragraph.heading
            for _, document, _, paragraph in self.iter_paragraphs()
            if paragraph.heading is not None
        }


class Vocabulary(BaseModel):
    """Bijective map between token keys and dense integer indices"""

    model_config = ConfigDict(frozen=True)

    words: List[str]

    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def build_index(self) -> "Vocabulary":
        if not self.words:
            raise ValueError("vocabulary is empty")
        index = {word: i for i, word in enumerate(self.words)}
        if len(index) != len(self.words):
            raise ValueError("vocabulary contains duplicate entries")
        self._index = index
        return self

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self._index

    @property
    def size(self) -> int:
        return len(self.words)

    def index_of(self, word: str) -> Optional[int]:
        return self._index.get(word)

    def word(self, index: int) -> str:
        return self.words[index]

    def encode(self, tokens: List[Token]) -> np.ndarray:
        """Vocabulary indices of tokens; -1 marks out-of-vocabulary tokens"""
        return np.fromiter(
            (self._index.get(token.key, -1) for token in tokens),
            dtype=np.int64,
            count=len(tokens),
        )

    def concept_mask(self) -> np.ndarray:
        return np.array([bool(CONCEPT_PATTERN.match(w)) for w in self.words], dtype=bool)


class FrequencyTables(BaseModel):
    """Occurrence counts behind the w-topic bias coefficients"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    doc_ids: List[str]
    par_df: np.ndarray = Field(..., description="Paragraphs (collection-wide) containing w")
    doc_par_df: np.ndarray = Field(..., description="Paragraphs of document d containing w")
    doc_df: np.ndarray = Field(..., description="Documents containing w")
    paragraphs_in_doc: np.ndarray
    total_paragraphs: int = Field(..., ge=1)
    total_docs: int = Field(..., ge=1)

    _row: Dict[str, int] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def check_shapes(self) -> "FrequencyTables":
        if self.doc_par_df.shape != (len(self.doc_ids), self.par_df.shape[0]):
            raise ValueError("doc_par_df shape does not match documents x vocabulary")
        if int(self.paragraphs_in_doc.sum()) != self.total_paragraphs:
            raise ValueError("paragraph counts do not add up")
        self._row = {doc_id: i for i, doc_id in enumerate(self.doc_ids)}
        return self

    def doc_row(self, doc_id: str) -> Optional[int]:
        return self._row.get(doc_id)


class CorpusStats(BaseModel):
    """Summary statistics of a corpus"""

    documents: int
    paragraphs: int
    tokens: int
    vocabulary: int = Field(..., description="All distinct token keys")
    word_vocabulary: int = Field(..., description="Distinct plain words")
    concept_vocabulary: int = Field(..., description="Distinct concept IDs")
    languages: List[str]
