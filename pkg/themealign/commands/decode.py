"""decode: Viterbi topic sequences for every document of a corpus"""

import argparse
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..schemas.corpus import Corpus
from ..services.corpus_loader import load_corpus
from ..services.persistence import dump_assignments, load_model
from ..services.training import decode_corpus
from .common import add_common_flags, add_corpus_flags, load_graph, model_path

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "decode", help="Decode topic sequences (defaults to the training documents)"
    )
    add_common_flags(parser)
    add_corpus_flags(parser)
    parser.add_argument("--model", type=Path, help="Model file (default: OUT/model.json)")
    parser.add_argument("--relations", type=Path, help="Concept relation edge list")
    parser.add_argument("--assignments", type=Path, help="Output file (default: OUT/assignments.jsonl)")
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    model = load_model(model_path(config))
    if config.corpus is None:
        documents = model.corpus
    else:
        corpora = [load_corpus(config.corpus)]
        if config.corpus2 is not None:
            corpora.append(load_corpus(config.corpus2))
        documents = Corpus(
            documents=[d for c in corpora for d in c.documents],
            languages=list(dict.fromkeys(lang for c in corpora for lang in c.languages)),
        )

    topics = decode_corpus(model, documents, load_graph(config), threads=config.threads)
    target = config.assignments or config.out / "assignments.jsonl"
    dump_assignments(topics, target)
    print(target)
    return 0
