"""annotate: replace lexicon terms with disambiguated concept IDs"""

import argparse
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..services.concept_annotator import ConceptAnnotator, load_lexicon
from ..services.corpus_loader import dump_corpus, load_corpus
from .common import add_common_flags, add_corpus_flags, load_graph, require

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("annotate", help="Annotate corpora with concept IDs")
    add_common_flags(parser)
    add_corpus_flags(parser)
    parser.add_argument("--lexicon", type=Path, help="surface<TAB>conceptId<TAB>prior lexicon")
    parser.add_argument("--relations", type=Path, help="Concept relation edge list")
    parser.add_argument("--scope", choices=["paragraph", "document"])
    parser.add_argument("--solver", choices=["exact", "greedy"])
    parser.add_argument(
        "--fallback", action=argparse.BooleanOptionalAction,
        help="Fall back to greedy selection for instances over the exact budget",
    )
    parser.add_argument("--exact-budget", dest="exact_budget", type=int)
    parser.set_defaults(func=run)


def annotated_path(out_dir: Path, source: Path) -> Path:
    return out_dir / f"{source.stem}.annotated.jsonl"


def run(config: PipelineConfig) -> int:
    lexicon = load_lexicon(require(config.lexicon, "--lexicon"))
    annotator = ConceptAnnotator(
        lexicon,
        load_graph(config),
        scope=config.scope,
        mode=config.solver,
        greedy_fallback=config.greedy_fallback,
        max_search_space=config.exact_budget,
    )
    sources = [require(config.corpus, "--corpus")]
    if config.corpus2 is not None:
        sources.append(config.corpus2)

    for source in sources:
        annotated = annotator.annotate_corpus(load_corpus(source), threads=config.threads)
        target = annotated_path(config.out, source)
        dump_corpus(annotated, target)
        print(target)
    return 0
