"""Domain exceptions raised by the alignment pipeline"""

from typing import Optional


class ThemeAlignError(Exception):
    """Base class for all pipeline errors"""


class CorpusParseError(ThemeAlignError):
    """A corpus line could not be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class CorpusValidationError(ThemeAlignError):
    """A parsed corpus violates a structural invariant"""


class LexiconError(ThemeAlignError):
    """Malformed or inconsistent concept lexicon"""


class RelationGraphError(ThemeAlignError):
    """Malformed concept relation graph"""


class InstanceTooLargeError(ThemeAlignError):
    """Exact disambiguation refused because the search space exceeds the budget"""

    def __init__(self, search_space: int, budget: int):
        self.search_space = search_space
        self.budget = budget
        super().__init__(
            f"exact solver search space {search_space} exceeds budget {budget}"
        )


class ModelFormatError(ThemeAlignError):
    """A persisted model file is unreadable or inconsistent"""


class EvaluationError(ThemeAlignError):
    """Alignment evaluation has nothing to evaluate"""


class TranslationTableError(ThemeAlignError):
    """Translation table is missing or empty"""
