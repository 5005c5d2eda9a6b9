"""export-lm: ranked word lists of a trained model"""

import argparse
import json
import logging
from pathlib import Path

from ..config.settings import PipelineConfig
from ..core.lda2 import export_language_models
from ..core.theme_hmm import topic_language_models
from ..services.persistence import load_model
from .common import add_common_flags, model_path

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("export-lm", help="Export background, specific and topic word lists")
    add_common_flags(parser)
    parser.add_argument("--model", type=Path, help="Model file (default: OUT/model.json)")
    parser.add_argument("--top-n", dest="top_n", type=int, help="Words per list")
    parser.set_defaults(func=run)


def run(config: PipelineConfig) -> int:
    model = load_model(model_path(config))
    models = export_language_models(model.wstate, config.top_n)
    if model.tstate is not None:
        models = models.model_copy(update={"topics": topic_language_models(model.tstate, config.top_n)})

    config.out.mkdir(parents=True, exist_ok=True)
    target = config.out / "language-models.json"
    with open(target, "w", encoding="utf-8") as f:
        json.dump(models.model_dump(mode="json"), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    print(target)
    return 0
