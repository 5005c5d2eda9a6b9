"""
Segment formation and alignment evaluation

Assigned t-topics (or baseline clusters) are compared with gold section
headings through the heading x topic overlap matrix:

    Rec  = sum_h max_k overlap(h, k) / P
    Prec = sum_k max_h overlap(h, k) / P

pooled over every evaluated paragraph of the collection (or of both
collections in the bilingual setting).
"""

import json
import logging
from pathlib import Path
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from ..errors import EvaluationError
from ..schemas.alignment import AlignmentReport, AlignmentScope, Segment
from ..schemas.corpus import Corpus, ParagraphKey

logger = logging.getLogger(__name__)

REPORT_METRICS = ("precision", "recall", "f1")


def form_segments(topics: Sequence[int], doc_id: str = "") -> List[Segment]:
    """
    Split a topic sequence into maximal constant runs

    Args:
        topics: One topic per paragraph, non-empty
        doc_id: Document the sequence belongs to

    Returns:
        Segments in paragraph order
    """
    if len(topics) == 0:
        raise ValueError("cannot segment an empty topic sequence")
    segments = []
    start = 0
    for t in range(1, len(topics) + 1):
        if t == len(topics) or topics[t] != topics[start]:
            segments.append(Segment(doc_id=doc_id, topic=int(topics[start]), start=start, end=t - 1))
            start = t
    return segments


def flatten_segments(segments: Sequence[Segment]) -> List[int]:
    """Inverse of form_segments"""
    return [segment.topic for segment in segments for _ in range(segment.length)]


def paragraph_assignments(
    corpus: Corpus, topics_by_doc: Mapping[str, Sequence[int]]
) -> Dict[ParagraphKey, int]:
    """Per-paragraph topics of every document that has a topic sequence"""
    assignments: Dict[ParagraphKey, int] = {}
    for document in corpus.documents:
        topics = topics_by_doc.get(document.id)
        if topics is None:
            continue
        if len(topics) != len(document.paragraphs):
            raise EvaluationError(
                f"document '{document.id}' has {len(document.paragraphs)} paragraphs "
                f"but {len(topics)} topics"
            )
        for paragraph, topic in zip(document.paragraphs, topics):
            assignments[(document.id, paragraph.id)] = int(topic)
    return assignments


def evaluate_alignment(
    assignments: Mapping[ParagraphKey, Hashable],
    headings: Mapping[ParagraphKey, str],
    scope: AlignmentScope = AlignmentScope.MONOLINGUAL,
    heading_map: Optional[Mapping[str, str]] = None,
) -> AlignmentReport:
    """
    Precision and recall of assigned topics against gold headings

    Paragraphs without a gold heading are excluded and counted. Headings
    found in ``heading_map`` are replaced by their mapped label first, so
    translated headings of a second language fall together with the
    original ones.

    Args:
        assignments: Paragraph -> assigned topic or cluster
        headings: Paragraph -> gold heading
        scope: Recorded on the report
        heading_map: Optional heading translation

    Returns:
        Alignment report with the overlap matrix

    Raises:
        EvaluationError: no paragraph has both a topic and a heading
    """
    evaluated = sorted(key for key in assignments if key in headings)
    excluded = len(assignments) - len(evaluated)
    if not evaluated:
        raise EvaluationError("no paragraph has both an assigned topic and a gold heading")
    if excluded:
        logger.info("%d assigned paragraphs have no gold heading and are excluded", excluded)

    heading_map = heading_map or {}
    frame = pd.DataFrame(
        {
            "heading": [heading_map.get(headings[key], headings[key]) for key in evaluated],
            "topic": [str(assignments[key]) for key in evaluated],
        }
    )
    overlap = pd.crosstab(frame["heading"], frame["topic"])

    total = len(evaluated)
    recall = int(overlap.max(axis=1).sum()) / total
    precision = int(overlap.max(axis=0).sum()) / total
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0

    return AlignmentReport(
        precision=precision,
        recall=recall,
        f1=f1,
        scope=scope,
        evaluated_paragraphs=total,
        excluded_paragraphs=excluded,
        num_headings=int(overlap.shape[0]),
        num_topics=int(overlap.shape[1]),
        overlap={
            str(h): {str(k): int(v) for k, v in row.items() if v}
            for h, row in overlap.iterrows()
        },
    )


def load_heading_map(path: Path) -> Dict[str, str]:
    """Read ``source_heading<TAB>target_heading`` lines"""
    frame = pd.read_csv(
        path, sep="\t", header=None, names=["source", "target"], dtype=str,
        keep_default_na=False,
    )
    return dict(zip(frame["source"].str.strip(), frame["target"].str.strip()))


def write_report(
    report: AlignmentReport,
    out_dir: Path,
    k: Optional[int] = None,
    name: str = "report",
) -> Tuple[Path, Path]:
    """
    Write the report as ``metric,scope,K,value`` CSV and as JSON

    Args:
        report: Evaluation result
        out_dir: Output directory (created if missing)
        k: Number of topics of the evaluated model, empty for baselines
        name: File stem

    Returns:
        (csv path, json path)
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [
        {"metric": metric, "scope": report.scope.value, "K": k, "value": getattr(report, metric)}
        for metric in REPORT_METRICS
    ]
    rows += [
        {"metric": "evaluated_paragraphs", "scope": report.scope.value, "K": k,
         "value": report.evaluated_paragraphs},
        {"metric": "excluded_paragraphs", "scope": report.scope.value, "K": k,
         "value": report.excluded_paragraphs},
    ]
    csv_path = out_dir / f"{name}.csv"
    json_path = out_dir / f"{name}.json"
    pd.DataFrame(rows, columns=["metric", "scope", "K", "value"]).astype({"K": "Int64"}).to_csv(
        csv_path, index=False
    )
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(
        "P=%.4f R=%.4f F=%.4f over %d paragraphs -> %s",
        report.precision, report.recall, report.f1, report.evaluated_paragraphs, csv_path,
    )
    return csv_path, json_path
