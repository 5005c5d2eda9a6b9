#!/usr/bin/env python3
"""
Helper script to generate a synthetic bilingual corpus for trying out the pipeline

Usage:
    python scripts/generate_synthetic_corpus.py output_dir [seed]

Writes corpus.en.jsonl, corpus.fr.jsonl and relations.txt to output_dir.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from themealign.services.corpus_loader import dump_corpus  # noqa: E402
from themealign.core.relations import write_relation_graph  # noqa: E402
from themealign.services.synthetic import generate_synthetic_corpus  # noqa: E402


def main():
    if len(sys.argv) not in (2, 3):
        print("Usage: python generate_synthetic_corpus.py output_dir [seed]")
        sys.exit(1)

    out_dir = Path(sys.argv[1])
    seed = int(sys.argv[2]) if len(sys.argv) == 3 else 0
    out_dir.mkdir(parents=True, exist_ok=True)

    synthetic = generate_synthetic_corpus(
        concepts_per_topic=10, languages=("en", "fr"), seed=seed
    )
    for corpus in synthetic.split_by_language():
        path = out_dir / f"corpus.{corpus.languages[0]}.jsonl"
        dump_corpus(corpus, path)
        print(f"Wrote {len(corpus)} documents to {path}")

    write_relation_graph(synthetic.relations, out_dir / "relations.txt")
    print(f"Wrote {synthetic.relations.num_edges} relations to {out_dir / 'relations.txt'}")


if __name__ == "__main__":
    main()
