"""eval: precision / recall of decoded topics against gold headings"""

import argparse
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..schemas.alignment import AlignmentScope
from ..services.alignment import (
    evaluate_alignment,
    load_heading_map,
    paragraph_assignments,
    write_report,
)
from ..services.persistence import load_assignments
from .common import add_common_flags, add_corpus_flags, load_corpora, require

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate topic assignments against headings")
    add_common_flags(parser)
    add_corpus_flags(parser)
    parser.add_argument("--assignments", type=Path, help="Decode output")
    parser.add_argument("--heading-map", dest="heading_map", type=Path,
                        help="source<TAB>target heading translations")
    parser.add_argument("--k", type=int, help="Number of topics recorded in the report")
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    topics = load_assignments(require(config.assignments, "--assignments"))
    corpora = load_corpora(config)

    assignments = {}
    headings = {}
    for corpus in corpora:
        assignments.update(paragraph_assignments(corpus, topics))
        headings.update(corpus.headings())
    heading_map = load_heading_map(config.heading_map) if config.heading_map else None
    scope = AlignmentScope.BILINGUAL if len(corpora) > 1 else AlignmentScope.MONOLINGUAL

    report = evaluate_alignment(assignments, headings, scope, heading_map)
    write_report(report, config.out, k=config.k, name="eval")
    print(f"precision={report.precision:.4f} recall={report.recall:.4f} f1={report.f1:.4f}")
    return 0
