"""
Pydantic schemas for concept annotation

Mentions of (possibly multi-word) terms become partitions of a complete
n-partite graph whose vertices are candidate concepts; disambiguation picks
one vertex per partition maximizing the total edge weight.
"""

import itertools
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from .corpus import CONCEPT_PATTERN

PRIOR_TOLERANCE = 1e-9


class SolverMode(str, Enum):
    """Max-weight selection strategies"""
    EXACT = "exact"
    GREEDY = "greedy"


class DisambiguationScope(str, Enum):
    """Unit of text forming one disambiguation instance"""
    PARAGRAPH = "paragraph"
    DOCUMENT = "document"


class ConceptCandidate(BaseModel):
    """Concept a surface form may refer to"""

    model_config = ConfigDict(frozen=True)

    concept_id: str
    prior: float = Field(..., ge=0.0, le=1.0)

    @field_validator("concept_id")
    @classmethod
    def check_concept_id(cls, v: str) -> str:
        if not CONCEPT_PATTERN.match(v):
            raise ValueError(f"malformed concept id '{v}'")
        return v

    @property
    def sort_key(self) -> Tuple[float, str]:
        """Canonical tie-break order: higher prior first, then concept ID"""
        return (-self.prior, self.concept_id)


class ConceptLexicon(BaseModel):
    """Surface form -> candidate concepts, surface forms stored as space-joined folded words"""

    model_config = ConfigDict(frozen=True)

    entries: Dict[str, List[ConceptCandidate]] = Field(default_factory=dict)

    _max_span: int = PrivateAttr(default=0)

    @model_validator(mode="after")
    def check_entries(self) -> "ConceptLexicon":
        max_span = 0
        for surface, candidates in self.entries.items():
            if not candidates:
                raise ValueError(f"surface form '{surface}' has no candidates")
            total = sum(c.prior for c in candidates)
            if total > 1.0 + PRIOR_TOLERANCE:
                raise ValueError(f"priors of '{surface}' sum to {total:.6f} > 1")
            candidates.sort(key=lambda c: c.sort_key)
            max_span = max(max_span, len(surface.split()))
        self._max_span = max_span
        return self

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def max_span(self) -> int:
        """Longest surface form, in tokens"""
        return self._max_span

    def candidates(self, surface: str) -> List[ConceptCandidate]:
        return self.entries.get(surface, [])


class MentionPartition(BaseModel):
    """One matched term: its token span and its candidate concepts"""

    model_config = ConfigDict(frozen=True)

    paragraph_id: str
    start: int = Field(..., ge=0)
    end: int = Field(..., description="Exclusive end token index")
    surface: str
    candidates: List[ConceptCandidate]

    @model_validator(mode="after")
    def check_span(self) -> "MentionPartition":
        if self.end <= self.start:
            raise ValueError("mention span must cover at least one token")
        if not self.candidates:
            raise ValueError("mention has no candidates")
        return self

    @property
    def length(self) -> int:
        return self.end - self.start


class DisambiguationInstance(BaseModel):
    """Complete n-partite graph over the candidates of a set of mentions

    ``weights[(i, k)]`` for ``i < k`` is a dense ``len(V_i) x len(V_k)`` matrix of
    edge weights between the candidates of partitions i and k.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    partitions: List[MentionPartition]
    weights: Dict[Tuple[int, int], np.ndarray] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_complete(self) -> "DisambiguationInstance":
        n = len(self.partitions)
        if n == 0:
            raise ValueError("instance has no partitions")
        for i, k in itertools.combinations(range(n), 2):
            matrix = self.weights.get((i, k))
            expected = (len(self.partitions[i].candidates), len(self.partitions[k].candidates))
            if matrix is None or matrix.shape != expected:
                raise ValueError(f"missing or misshapen weight matrix for partitions ({i}, {k})")
            if not np.all(np.isfinite(matrix)) or np.any(matrix < 0):
                raise ValueError("edge weights must be finite and non-negative")
        return self

    @property
    def size(self) -> int:
        return len(self.partitions)

    @property
    def search_space(self) -> int:
        """Number of complete assignments"""
        total = 1
        for partition in self.partitions:
            total *= len(partition.candidates)
        return total

    def edge_weight(self, i: int, a: int, k: int, b: int) -> float:
        """Weight between candidate a of partition i and candidate b of partition k"""
        if i < k:
            return float(self.weights[(i, k)][a, b])
        return float(self.weights[(k, i)][b, a])

    def objective(self, choices: Sequence[int]) -> float:
        """Sum of pairwise edge weights of a complete assignment, summed in (i, k) order"""
        total = 0.0
        for i, k in itertools.combinations(range(len(self.partitions)), 2):
            total += float(self.weights[(i, k)][choices[i], choices[k]])
        return total


class SelectionResult(BaseModel):
    """Chosen candidate per partition"""

    choices: List[int] = Field(..., description="Candidate index per partition")
    concept_ids: List[str]
    objective: float
    mode: SolverMode
