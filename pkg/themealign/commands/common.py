"""Flags and loaders shared by the subcommands"""

import argparse
from pathlib import Path
from typing import Any, Dict, List, Optional

from ..config.settings import PipelineConfig, load_config
from ..core.relations import RelationGraph, load_relation_graph
from ..schemas.corpus import Corpus
from ..services.corpus_loader import concatenate, load_corpus

# argparse destination -> PipelineConfig field
FLAG_FIELDS = {
    "corpus": "corpus",
    "corpus2": "corpus2",
    "lexicon": "lexicon",
    "relations": "relations",
    "ttable": "ttable",
    "model": "model",
    "assignments": "assignments",
    "heading_map": "heading_map",
    "gold_pairs": "gold_pairs",
    "out": "out",
    "k": "k",
    "kappa": "kappa",
    "alpha": "alpha",
    "beta": "beta",
    "lam": "lam",
    "eta": "eta",
    "gamma": "gamma",
    "iters": "iterations",
    "burnin": "burn_in",
    "wtopic_iters": "wtopic_iterations",
    "wtopic_burnin": "wtopic_burn_in",
    "seed": "seed",
    "variant": "variant",
    "boost": "use_concept_boost",
    "transitions": "use_transitions",
    "boost_exponent": "boost_exponent",
    "decode_with_mixture": "decode_with_mixture",
    "scope": "scope",
    "solver": "solver",
    "fallback": "greedy_fallback",
    "exact_budget": "exact_budget",
    "threshold": "threshold",
    "baseline": "baseline",
    "mode": "mode",
    "top_n": "top_n",
    "threads": "threads",
    "log_level": "log_level",
    "log_format": "log_format",
}


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    """Flags every subcommand accepts"""
    parser.add_argument("--config", type=Path, help="key=value configuration file")
    parser.add_argument("--out", type=Path, help="Output directory (default: out)")
    parser.add_argument("--seed", type=int, help="Random seed (env: THEMEALIGN_SEED)")
    parser.add_argument("--threads", type=int, help="Worker cap")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING, ...")
    parser.add_argument("--log-format", dest="log_format", choices=["text", "json"])


def add_corpus_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", type=Path, help="JSONL corpus")
    parser.add_argument("--corpus2", type=Path, help="Second-language JSONL corpus")


def add_model_flags(parser: argparse.ArgumentParser) -> None:
    """Hyperparameters of both sampling layers"""
    parser.add_argument("--k", type=int, help="Number of t-topics")
    parser.add_argument("--kappa", type=float, help="Self-transition bonus")
    parser.add_argument("--alpha", type=float, help="Transition smoothing")
    parser.add_argument("--beta", type=float, help="Topic-word smoothing (default W/100000)")
    parser.add_argument("--lambda", dest="lam", type=float, help="Document mixture smoothing (default 50/K)")
    parser.add_argument("--eta", type=float, help="W-topic word smoothing (default W/100000)")
    parser.add_argument("--gamma", type=float, help="W-topic mixture smoothing (default W/|P|)")
    parser.add_argument("--iters", type=int, help="Gibbs sweeps")
    parser.add_argument("--burnin", type=int, help="Burn-in sweeps")
    parser.add_argument("--wtopic-iters", dest="wtopic_iters", type=int)
    parser.add_argument("--wtopic-burnin", dest="wtopic_burnin", type=int)
    parser.add_argument("--variant", help="2lda, 2lda_hmm, 2lda_c or 2lda_c_hmm")
    parser.add_argument("--boost", action=argparse.BooleanOptionalAction, help="Concept boost")
    parser.add_argument(
        "--transitions", action=argparse.BooleanOptionalAction, help="Sticky-HMM transitions"
    )
    parser.add_argument("--boost-exponent", dest="boost_exponent", type=float)
    parser.add_argument(
        "--decode-with-mixture", dest="decode_with_mixture",
        action=argparse.BooleanOptionalAction,
    )
    parser.add_argument("--relations", type=Path, help="Concept relation edge list")


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    """Flags override the config file, which overrides the environment"""
    overrides: Dict[str, Any] = {
        field: getattr(args, dest)
        for dest, field in FLAG_FIELDS.items()
        if getattr(args, dest, None) is not None
    }
    return load_config(getattr(args, "config", None), overrides)


def require(value: Optional[Path], flag: str) -> Path:
    if value is None:
        raise ValueError(f"{flag} is required")
    return value


def load_corpora(config: PipelineConfig) -> List[Corpus]:
    """The first corpus, plus the second one when configured"""
    corpora = [load_corpus(require(config.corpus, "--corpus"))]
    if config.corpus2 is not None:
        corpora.append(load_corpus(config.corpus2))
    return corpora


def training_corpus(corpora: List[Corpus]) -> Corpus:
    """Bilingual runs train on the concatenation of both collections"""
    return corpora[0] if len(corpora) == 1 else concatenate(corpora[0], corpora[1])


def load_graph(config: PipelineConfig) -> Optional[RelationGraph]:
    return load_relation_graph(config.relations) if config.relations is not None else None


def model_path(config: PipelineConfig) -> Path:
    return config.model if config.model is not None else config.out / "model.json"
