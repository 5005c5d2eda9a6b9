"""Pydantic schemas shared across the pipeline"""

from .alignment import (
    AlignmentReport,
    AlignmentScope,
    BaselineKind,
    BaselineResult,
    DocAlignMode,
    DocumentAlignment,
    Segment,
)
from .concepts import (
    ConceptCandidate,
    ConceptLexicon,
    DisambiguationInstance,
    DisambiguationScope,
    MentionPartition,
    SelectionResult,
    SolverMode,
)
from .corpus import (
    Corpus,
    CorpusStats,
    Document,
    FrequencyTables,
    Paragraph,
    ParagraphKey,
    Token,
    TokenKind,
    Vocabulary,
)
from .model import (
    LanguageModels,
    ThemeDiagnostics,
    ThemeHyper,
    WTopic,
    WTopicHyper,
)

__all__ = [
    "AlignmentReport",
    "AlignmentScope",
    "BaselineKind",
    "BaselineResult",
    "ConceptCandidate",
    "ConceptLexicon",
    "Corpus",
    "CorpusStats",
    "DisambiguationInstance",
    "DisambiguationScope",
    "DocAlignMode",
    "Document",
    "DocumentAlignment",
    "FrequencyTables",
    "LanguageModels",
    "MentionPartition",
    "Paragraph",
    "ParagraphKey",
    "Segment",
    "SelectionResult",
    "SolverMode",
    "ThemeDiagnostics",
    "ThemeHyper",
    "Token",
    "TokenKind",
    "Vocabulary",
    "WTopic",
    "WTopicHyper",
]
