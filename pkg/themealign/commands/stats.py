"""stats: corpus size and vocabulary counts"""

import argparse
import json

from ..config.settings import PipelineConfig
from ..services.corpus_loader import corpus_statistics
from .common import add_common_flags, add_corpus_flags, load_corpora


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("stats", help="Print corpus statistics as JSON")
    add_common_flags(parser)
    add_corpus_flags(parser)
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    for corpus in load_corpora(config):
        print(json.dumps(corpus_statistics(corpus).model_dump(mode="json"), sort_keys=True))
    return 0
