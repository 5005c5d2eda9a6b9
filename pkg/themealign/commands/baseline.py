"""baseline: concept tf-idf, translation-table or all-singleton paragraph clusters"""

import argparse
import json
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..schemas.alignment import BaselineKind
from ..services.alignment import load_heading_map, write_report
from ..services.baselines import (
    load_translation_table,
    singleton_baseline,
    tfidf_concept_baseline,
    translation_table_baseline,
)
from .common import add_common_flags, add_corpus_flags, load_corpora, require

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("baseline", help="Run a paragraph-clustering baseline")
    add_common_flags(parser)
    add_corpus_flags(parser)
    parser.add_argument("--baseline", choices=[kind.value for kind in BaselineKind])
    parser.add_argument("--threshold", type=float, help="Minimum similarity for a pair")
    parser.add_argument("--ttable", type=Path, help="src<TAB>tgt<TAB>prob translation table")
    parser.add_argument("--heading-map", dest="heading_map", type=Path)
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    corpora = load_corpora(config)
    heading_map = load_heading_map(config.heading_map) if config.heading_map else None

    if config.baseline == BaselineKind.SINGLETON:
        result = singleton_baseline(corpora[0], corpora[1] if len(corpora) > 1 else None, heading_map)
    else:
        if len(corpora) < 2:
            raise ValueError(f"the {config.baseline.value} baseline needs --corpus2")
        if config.baseline == BaselineKind.CONCEPTS:
            result = tfidf_concept_baseline(corpora[0], corpora[1], config.threshold, heading_map)
        else:
            table = load_translation_table(require(config.ttable, "--ttable"))
            result = translation_table_baseline(
                corpora[0], corpora[1], table, config.threshold, heading_map, config.threads
            )

    name = f"baseline-{config.baseline.value}"
    config.out.mkdir(parents=True, exist_ok=True)
    with open(config.out / f"{name}-clusters.json", "w", encoding="utf-8") as f:
        json.dump([[list(key) for key in cluster] for cluster in result.clusters], f)
        f.write("\n")
    if result.report is None:
        logger.warning("no gold headings; clusters written without evaluation")
        return 0
    write_report(result.report, config.out, name=name)
    print(
        f"precision={result.report.precision:.4f} recall={result.report.recall:.4f} "
        f"f1={result.report.f1:.4f}"
    )
    return 0
