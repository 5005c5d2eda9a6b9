"""
Concept relation graph

Undirected weighted edges between concept IDs, backed by networkx. Used for
disambiguation edge weights and for the neighbor-based topic boost.
"""

import logging
import math
from pathlib import Path
from typing import Iterable, List, Optional, Tuple

import networkx as nx

from ..errors import RelationGraphError

logger = logging.getLogger(__name__)


class RelationGraph:
    """Weighted concept-concept relations with O(degree) adjacency"""

    def __init__(self, edges: Iterable[Tuple[str, str, float]] = ()):
        self._graph = nx.Graph()
        for u, v, weight in edges:
            self.add_edge(u, v, weight)

    def add_edge(self, u: str, v: str, weight: float) -> None:
        if u == v:
            raise RelationGraphError(f"self-loop on {u}")
        if not math.isfinite(weight) or weight < 0.0 or weight > 1.0:
            raise RelationGraphError(f"weight of ({u}, {v}) must lie in [0, 1], got {weight}")
        self._graph.add_edge(u, v, weight=float(weight))

    def __contains__(self, concept_id: object) -> bool:
        return concept_id in self._graph

    def __len__(self) -> int:
        return self._graph.number_of_nodes()

    @property
    def num_edges(self) -> int:
        return self._graph.number_of_edges()

    def neighbors(self, concept_id: str) -> List[str]:
        """Directly related concepts, sorted for deterministic iteration"""
        if concept_id not in self._graph:
            return []
        return sorted(self._graph.neighbors(concept_id))

    def edges(self) -> List[Tuple[str, str, float]]:
        """All edges as (u, v, weight) with u < v, sorted"""
        return sorted(
            (min(u, v), max(u, v), data["weight"]) for u, v, data in self._graph.edges(data=True)
        )

    def weight(self, u: str, v: str) -> Optional[float]:
        """Edge weight, or None when the concepts are not related"""
        data = self._graph.get_edge_data(u, v)
        return None if data is None else data["weight"]

    def jaccard(self, u: str, v: str) -> float:
        """Jaccard similarity of the two neighborhoods (0 when either is empty)"""
        if u not in self._graph or v not in self._graph:
            return 0.0
        left = set(self._graph.neighbors(u))
        right = set(self._graph.neighbors(v))
        union = left | right
        if not union:
            return 0.0
        return len(left & right) / len(union)

    def relatedness(self, u: str, v: str) -> float:
        """Edge weight if related, else neighborhood overlap; identical concepts score 1"""
        if u == v:
            return 1.0
        weight = self.weight(u, v)
        if weight is not None:
            return weight
        return self.jaccard(u, v)


def load_relation_graph(path: Path) -> RelationGraph:
    """
    Read a space-separated ``conceptId conceptId weight`` edge list

    Lines starting with ``#`` are comments.

    Raises:
        RelationGraphError: unreadable lines, self-loops or out-of-range weights
    """
    try:
        parsed = nx.read_weighted_edgelist(path, comments="#", nodetype=str)
    except (TypeError, ValueError, IndexError) as e:
        raise RelationGraphError(f"cannot parse edge list {path}: {e}") from e

    graph = RelationGraph(
        (u, v, data["weight"]) for u, v, data in sorted(parsed.edges(data=True))
    )
    logger.info("loaded relation graph: %d concepts, %d edges", len(graph), graph.num_edges)
    return graph


def write_relation_graph(graph: RelationGraph, path: Path) -> None:
    """Write the graph as a sorted ``conceptId conceptId weight`` edge list"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# conceptId conceptId weight\n")
        for u, v, weight in graph.edges():
            f.write(f"{u} {v} {weight!r}\n")
