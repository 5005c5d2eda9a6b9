"""
Pydantic schemas for the two sampling layers

Hyperparameters, language-model exports and diagnostics. The sampler
states themselves live next to their engines in ``themealign.core``.
"""

from enum import IntEnum
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class WTopic(IntEnum):
    """Word-level roles assigned by the paragraph layer"""
    BACKGROUND = 0
    DOCUMENT = 1
    THEME = 2


NUM_WTOPICS = len(WTopic)


class WTopicHyper(BaseModel):
    """Hyperparameters of the w-topic sampler"""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., gt=0.0, description="Smoothing of w-topic word distributions")
    gamma: float = Field(..., gt=0.0, description="Smoothing of per-paragraph w-topic mixtures")
    iterations: int = Field(default=200, ge=0)
    burn_in: int = Field(default=100, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def check_schedule(self) -> "WTopicHyper":
        if self.iterations < self.burn_in:
            raise ValueError("iterations must be >= burn_in")
        return self


class ThemeHyper(BaseModel):
    """Hyperparameters of the sticky-HMM theme sampler"""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=2, description="Number of t-topics")
    beta: float = Field(..., gt=0.0, description="Topic-word smoothing")
    lam: float = Field(..., gt=0.0, description="Document mixture smoothing")
    alpha: float = Field(default=0.01, gt=0.0, description="Transition smoothing")
    kappa: float = Field(default=1000.0, ge=0.0, description="Self-transition bonus")
    use_transitions: bool = Field(default=True, description="Model paragraph order with the HMM")
    use_concept_boost: bool = Field(default=True)
    boost_exponent: float = Field(default=1.0, ge=0.0)
    boost_floor: float = Field(default=1e-12, gt=0.0, le=1.0)
    decode_with_mixture: bool = Field(
        default=True, description="Include the document mixture in Viterbi emissions"
    )
    iterations: int = Field(default=200, ge=0)
    burn_in: int = Field(default=100, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def check_schedule(self) -> "ThemeHyper":
        if self.iterations < self.burn_in:
            raise ValueError("iterations must be >= burn_in")
        return self


class LanguageModels(BaseModel):
    """Ranked word lists of the induced language models"""

    background: List[str]
    background_by_language: Dict[str, List[str]] = Field(default_factory=dict)
    document_specific: Dict[str, List[str]] = Field(default_factory=dict)
    theme_specific: List[str] = Field(default_factory=list)
    topics: Dict[int, List[str]] = Field(
        default_factory=dict, description="Top words per t-topic"
    )


class ThemeDiagnostics(BaseModel):
    """Facts worth reporting after theme sampling"""

    documents_without_theme_tokens: List[str] = Field(default_factory=list)
    paragraphs_without_theme_tokens: int = 0
    theme_tokens: int = 0
