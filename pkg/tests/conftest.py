"""Shared fixtures: small hand-built corpora, synthetic corpora and file writers"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pytest

from themealign.config.settings import PipelineConfig
from themealign.schemas.corpus import Corpus, Document, Paragraph, Token
from themealign.services.synthetic import generate_synthetic_corpus


def build_corpus(
    documents: Dict[str, Sequence[Sequence[str]]],
    headings: Optional[Dict[str, Sequence[Optional[str]]]] = None,
    lang: str = "en",
    titles: Optional[Dict[str, str]] = None,
) -> Corpus:
    """Corpus from doc id -> paragraphs of raw tokens; paragraph ids are p1, p2, ..."""
    headings = headings or {}
    titles = titles or {}
    built = []
    for doc_id, paragraphs in documents.items():
        labels = headings.get(doc_id, [None] * len(paragraphs))
        built.append(
            Document(
                id=doc_id,
                lang=lang,
                title=titles.get(doc_id, ""),
                paragraphs=[
                    Paragraph(
                        id=f"p{t + 1}",
                        heading=label,
                        tokens=[Token.from_raw(raw) for raw in tokens],
                    )
                    for t, (tokens, label) in enumerate(zip(paragraphs, labels))
                ],
            )
        )
    return Corpus(documents=built, languages=[lang])


@pytest.fixture
def corpus_factory():
    return build_corpus


@pytest.fixture
def city_corpus() -> Corpus:
    """2 documents x 2 paragraphs; 'the' everywhere, 'montreal' only in both paragraphs of d1"""
    return build_corpus(
        {
            "d1": [["the", "montreal", "hockey"], ["the", "montreal", "river"]],
            "d2": [["the", "paris", "river"], ["the", "wine", "museum"]],
        },
        headings={"d1": ["sport", "geography"], "d2": ["geography", "culture"]},
    )


@pytest.fixture
def write_jsonl(tmp_path: Path):
    """Write records (dicts or raw strings) as lines of a file under tmp_path"""

    def write(name: str, records: List[object]) -> Path:
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(record if isinstance(record, str) else json.dumps(record))
                f.write("\n")
        return path

    return write


@pytest.fixture
def write_text(tmp_path: Path):
    def write(name: str, content: str) -> Path:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return write


@pytest.fixture(scope="session")
def small_synthetic():
    """Quick synthetic corpus for integrity and determinism checks"""
    return generate_synthetic_corpus(
        num_docs=6,
        num_topics=3,
        paragraphs_per_doc=5,
        tokens_per_paragraph=12,
        background_words=30,
        words_per_topic=15,
        specific_words_per_doc=5,
        concepts_per_topic=4,
        seed=7,
    )


@pytest.fixture
def fast_config(tmp_path: Path) -> PipelineConfig:
    """Short sampling schedule writing under tmp_path"""
    return PipelineConfig(k=3, iterations=10, burn_in=5, seed=11, out=tmp_path / "out")
