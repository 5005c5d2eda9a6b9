"""train: fit the w-topic and theme layers and write the model file"""

import argparse
import json
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..services.persistence import save_model
from ..services.training import train_model
from .common import (
    add_common_flags,
    add_corpus_flags,
    add_model_flags,
    load_corpora,
    load_graph,
    model_path,
    training_corpus,
)

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Train a model on one or two corpora")
    add_common_flags(parser)
    add_corpus_flags(parser)
    add_model_flags(parser)
    parser.add_argument("--model", type=Path, help="Model file to write (default: OUT/model.json)")
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    corpus = training_corpus(load_corpora(config))
    model = train_model(corpus, config, load_graph(config))

    target = model_path(config)
    save_model(model, target)
    diagnostics = model.diagnostics()
    if diagnostics is not None:
        config.out.mkdir(parents=True, exist_ok=True)
        with open(config.out / "diagnostics.json", "w", encoding="utf-8") as f:
            json.dump(diagnostics.model_dump(mode="json"), f, indent=2, sort_keys=True)
            f.write("\n")
    print(target)
    return 0
