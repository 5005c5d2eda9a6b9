"""align-docs: pair the documents of two collections"""

import argparse
import json
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..schemas.alignment import DocAlignMode
from ..services.document_alignment import align_documents, load_gold_pairs
from ..services.persistence import load_model
from .common import add_common_flags, add_corpus_flags, load_corpora, require

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("align-docs", help="Align documents across two collections")
    add_common_flags(parser)
    add_corpus_flags(parser)
    parser.add_argument("--mode", choices=[mode.value for mode in DocAlignMode])
    parser.add_argument("--top-n", dest="top_n", type=int, help="Terms per document vector")
    parser.add_argument("--model", type=Path, help="Model trained on both collections (doc-topic)")
    parser.add_argument("--gold-pairs", dest="gold_pairs", type=Path,
                        help="doc_a<TAB>doc_b pairs (default: identical titles)")
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    corpora = load_corpora(config)
    if len(corpora) < 2:
        raise ValueError("document alignment needs --corpus2")
    state = None
    if config.mode == DocAlignMode.DOC_TOPIC:
        state = load_model(require(config.model, "--model")).wstate
    gold = load_gold_pairs(config.gold_pairs) if config.gold_pairs else None

    result = align_documents(corpora[0], corpora[1], config.mode, config.top_n, state, gold)
    config.out.mkdir(parents=True, exist_ok=True)
    target = config.out / f"doc-alignment-{config.mode.value}.json"
    with open(target, "w", encoding="utf-8") as f:
        json.dump(result.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")
    accuracy = "n/a" if result.accuracy is None else f"{result.accuracy:.4f}"
    print(f"accuracy={accuracy} pairs={len(result.pairs)}")
    return 0
