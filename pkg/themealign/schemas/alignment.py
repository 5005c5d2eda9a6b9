"""Alignment schemas: segments, evaluation reports and baseline results"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from .corpus import ParagraphKey

F1_TOLERANCE = 1e-9


class AlignmentScope(str, Enum):
    """Collections covered by an evaluation"""
    MONOLINGUAL = "monolingual"
    BILINGUAL = "bilingual"


class BaselineKind(str, Enum):
    """Paragraph-clustering baselines"""
    CONCEPTS = "concepts"
    TTABLE = "ttable"
    SINGLETON = "singleton"


class DocAlignMode(str, Enum):
    """Document representations for cross-collection document pairing"""
    TFIDF_WORDS = "tfidf-words"
    TFIDF_CONCEPTS = "tfidf-concepts"
    DOC_TOPIC = "doc-topic"


class Segment(BaseModel):
    """Maximal run of contiguous paragraphs sharing one t-topic"""

    doc_id: str = ""
    topic: int
    start: int = Field(..., ge=0)
    end: int = Field(..., ge=0, description="Inclusive end paragraph index")

    @model_validator(mode="after")
    def check_range(self) -> "Segment":
        if self.end < self.start:
            raise ValueError("segment end precedes start")
        return self

    @property
    def length(self) -> int:
        return self.end - self.start + 1


class AlignmentReport(BaseModel):
    """Precision / recall of assigned topics against gold section headings"""

    precision: float = Field(..., ge=0.0, le=1.0)
    recall: float = Field(..., ge=0.0, le=1.0)
    f1: float = Field(..., ge=0.0, le=1.0)
    scope: AlignmentScope = AlignmentScope.MONOLINGUAL
    evaluated_paragraphs: int = Field(..., ge=1)
    excluded_paragraphs: int = Field(default=0, ge=0)
    num_headings: int = Field(..., ge=1)
    num_topics: int = Field(..., ge=1)
    overlap: Dict[str, Dict[str, int]] = Field(
        default_factory=dict, description="heading -> assigned topic -> paragraph count"
    )

    @model_validator(mode="after")
    def check_consistency(self) -> "AlignmentReport":
        pr = self.precision + self.recall
        expected = 2 * self.precision * self.recall / pr if pr > 0 else 0.0
        if abs(self.f1 - expected) > F1_TOLERANCE:
            raise ValueError("f1 is not the harmonic mean of precision and recall")
        total = sum(sum(row.values()) for row in self.overlap.values())
        if self.overlap and total != self.evaluated_paragraphs:
            raise ValueError("overlap matrix does not cover the evaluated paragraphs")
        return self


class BaselineResult(BaseModel):
    """Paragraph clusters produced by a baseline, and their evaluation"""

    kind: BaselineKind
    threshold: Optional[float] = None
    clusters: List[List[ParagraphKey]]
    report: Optional[AlignmentReport] = None


class DocumentAlignment(BaseModel):
    """Pairing of documents across two collections"""

    mode: DocAlignMode
    top_n: int
    pairs: List[Tuple[str, str]]
    similarities: List[float]
    accuracy: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    correct: int = 0
    unpaired_a: List[str] = Field(default_factory=list)
    unpaired_b: List[str] = Field(default_factory=list)
