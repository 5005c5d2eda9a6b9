"""Pipeline settings using Pydantic"""

from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional

import yaml
from dotenv import dotenv_values
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..schemas.alignment import BaselineKind, DocAlignMode
from ..schemas.concepts import DisambiguationScope, SolverMode
from ..schemas.model import ThemeHyper, WTopicHyper

VARIANTS_PATH = Path(__file__).parent / "variants.yaml"

# Data-dependent defaults
SMOOTHING_VOCAB_DIVISOR = 100000.0
MIXTURE_NUMERATOR = 50.0


class PipelineConfig(BaseSettings):
    """Pipeline configuration

    Precedence: explicit overrides (CLI flags), then the key=value config
    file, then ``THEMEALIGN_*`` environment variables, then defaults.
    """

    model_config = SettingsConfigDict(
        env_prefix="THEMEALIGN_",
        case_sensitive=False,
        extra="ignore",
    )

    # Paths
    corpus: Optional[Path] = None
    corpus2: Optional[Path] = None
    lexicon: Optional[Path] = None
    relations: Optional[Path] = None
    ttable: Optional[Path] = None
    model: Optional[Path] = None
    assignments: Optional[Path] = None
    heading_map: Optional[Path] = None
    gold_pairs: Optional[Path] = None
    out: Path = Path("out")

    # W-topic layer (None = derived from the data)
    eta: Optional[float] = Field(default=None, gt=0.0)
    gamma: Optional[float] = Field(default=None, gt=0.0)
    wtopic_iterations: Optional[int] = Field(default=None, ge=0)
    wtopic_burn_in: Optional[int] = Field(default=None, ge=0)

    # Theme layer
    k: int = Field(default=10, ge=2)
    beta: Optional[float] = Field(default=None, gt=0.0)
    lam: Optional[float] = Field(default=None, gt=0.0)
    alpha: float = Field(default=0.01, gt=0.0)
    kappa: float = Field(default=1000.0, ge=0.0)
    variant: Optional[str] = None
    use_transitions: Optional[bool] = None
    use_concept_boost: Optional[bool] = None
    boost_exponent: float = Field(default=1.0, ge=0.0)
    decode_with_mixture: bool = True

    # Sampling schedule, shared by both layers unless overridden above
    iterations: int = Field(default=200, ge=0)
    burn_in: int = Field(default=100, ge=0)
    seed: int = 0

    # Concept annotation
    scope: DisambiguationScope = DisambiguationScope.PARAGRAPH
    solver: SolverMode = SolverMode.EXACT
    greedy_fallback: bool = True
    exact_budget: int = Field(default=1_000_000, ge=1)

    # Alignment
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    baseline: BaselineKind = BaselineKind.CONCEPTS
    mode: DocAlignMode = DocAlignMode.DOC_TOPIC
    top_n: int = Field(default=20, ge=1)

    # Runtime
    threads: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    log_format: Literal["text", "json"] = "text"

    @property
    def bilingual(self) -> bool:
        return self.corpus2 is not None

    def variant_flags(self) -> Dict[str, bool]:
        """Sequence-model and boost switches after applying the variant preset"""
        variants = load_variants()
        name = self.variant or variants["default_variant"]
        if name not in variants["variants"]:
            raise ValueError(
                f"unknown variant '{name}' (choose from {sorted(variants['variants'])})"
            )
        preset = variants["variants"][name]
        return {
            "use_transitions": (
                self.use_transitions
                if self.use_transitions is not None
                else bool(preset["use_transitions"])
            ),
            "use_concept_boost": (
                self.use_concept_boost
                if self.use_concept_boost is not None
                else bool(preset["use_concept_boost"])
            ),
        }

    def resolve_wtopic_hyper(self, vocab_size: int, num_paragraphs: int) -> WTopicHyper:
        """
        W-topic hyperparameters with data-dependent defaults filled in

        Args:
            vocab_size: W, size of the (possibly bilingual) vocabulary
            num_paragraphs: |P|, number of training paragraphs

        Returns:
            Frozen hyperparameters (eta = W/100000, gamma = W/|P| unless set)
        """
        return WTopicHyper(
            eta=self.eta if self.eta is not None else vocab_size / SMOOTHING_VOCAB_DIVISOR,
            gamma=self.gamma if self.gamma is not None else vocab_size / num_paragraphs,
            iterations=(
                self.wtopic_iterations if self.wtopic_iterations is not None else self.iterations
            ),
            burn_in=self.wtopic_burn_in if self.wtopic_burn_in is not None else self.burn_in,
            seed=self.seed,
        )

    def resolve_theme_hyper(self, vocab_size: int) -> ThemeHyper:
        """
        Theme hyperparameters with data-dependent defaults filled in

        Args:
            vocab_size: W, size of the (possibly bilingual) vocabulary

        Returns:
            Frozen hyperparameters (beta = W/100000, lambda = 50/K unless set)
        """
        flags = self.variant_flags()
        return ThemeHyper(
            k=self.k,
            beta=self.beta if self.beta is not None else vocab_size / SMOOTHING_VOCAB_DIVISOR,
            lam=self.lam if self.lam is not None else MIXTURE_NUMERATOR / self.k,
            alpha=self.alpha,
            kappa=self.kappa,
            use_transitions=flags["use_transitions"],
            use_concept_boost=flags["use_concept_boost"],
            boost_exponent=self.boost_exponent,
            decode_with_mixture=self.decode_with_mixture,
            iterations=self.iterations,
            burn_in=self.burn_in,
            seed=self.seed,
        )


@lru_cache
def load_variants() -> Dict[str, Any]:
    """Cached model-variant presets"""
    with open(VARIANTS_PATH, "r", encoding="utf-8") as f:
        return yaml.safe_load(f)


def load_config(
    config_file: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> PipelineConfig:
    """
    Build the pipeline configuration

    Args:
        config_file: Optional key=value file (dotenv syntax, keys are field names)
        overrides: Explicit values, typically parsed CLI flags; None values are ignored

    Returns:
        Validated configuration
    """
    values: Dict[str, Any] = {}
    if config_file is not None:
        if not Path(config_file).exists():
            raise FileNotFoundError(f"config file not found: {config_file}")
        values.update(
            {
                key.strip().lower(): value
                for key, value in dotenv_values(config_file).items()
                if value is not None
            }
        )
    if overrides:
        values.update({key: value for key, value in overrides.items() if value is not None})
    return PipelineConfig(**values)
