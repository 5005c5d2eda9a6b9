"""
Maximum edge-weighted selection on a complete n-partite graph

Picks one candidate per partition so that the sum of pairwise edge weights
between the picked candidates is maximal (a maximum edge-weighted clique
that touches every partition).

Exact mode is a depth-first branch-and-bound; the bound for a partial
assignment adds, for every open partition, its best gain against the
assigned partitions, plus the best edge of every open pair. Greedy mode
seeds with the heaviest edge and then extends one partition at a time.

Ties are resolved in canonical candidate order (higher prior first, then
concept ID) by visiting candidates in that order and only replacing the
incumbent on a strict improvement.
"""

import itertools
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import InstanceTooLargeError
from ..schemas.concepts import DisambiguationInstance, SelectionResult, SolverMode

logger = logging.getLogger(__name__)

DEFAULT_MAX_SEARCH_SPACE = 1_000_000

# Improvements smaller than this are treated as ties
EPSILON = 1e-12


class MaxWeightSelector:
    """Exact and greedy solvers for one disambiguation instance"""

    def __init__(self, instance: DisambiguationInstance):
        self.instance = instance
        self.n = instance.size
        self.order = [
            sorted(range(len(p.candidates)), key=lambda a, p=p: p.candidates[a].sort_key)
            for p in instance.partitions
        ]
        # Both orientations, so matrix[i][k] rows index candidates of i
        self.matrix: Dict[Tuple[int, int], np.ndarray] = {}
        for (i, k), weights in instance.weights.items():
            self.matrix[(i, k)] = weights
            self.matrix[(k, i)] = weights.T

    def exact(self, max_search_space: int = DEFAULT_MAX_SEARCH_SPACE) -> SelectionResult:
        """
        Branch-and-bound maximum over all complete assignments

        Args:
            max_search_space: Refuse instances with more complete assignments than this

        Returns:
            Optimal assignment (canonical among ties)

        Raises:
            InstanceTooLargeError: product of candidate counts exceeds the budget
        """
        space = self.instance.search_space
        if space > max_search_space:
            raise InstanceTooLargeError(space, max_search_space)
        if self.n == 1:
            return self._result([self.order[0][0]], SolverMode.EXACT)

        # Single-candidate partitions are fixed; only the others are branched on
        choices: List[int] = [0] * self.n
        free = [i for i, p in enumerate(self.instance.partitions) if len(p.candidates) > 1]
        fixed = sorted(set(range(self.n)) - set(free))
        base_value = sum(
            float(self.matrix[(i, k)][0, 0]) for i, k in itertools.combinations(fixed, 2)
        )
        gains = [
            sum((self.matrix[(i, k)][0] for i in fixed), np.zeros(len(self.order[k])))
            for k in free
        ]

        # Best edge per open pair, summed over the pairs still fully open at each depth
        m = len(free)
        pair_max = np.zeros((m, m))
        for x, y in itertools.combinations(range(m), 2):
            pair_max[x, y] = self.matrix[(free[x], free[y])].max()
        open_pairs = [float(np.triu(pair_max[d:, d:], 1).sum()) for d in range(m + 1)]

        incumbent = self.greedy()
        best: Dict[str, object] = {
            "value": incumbent.objective - 2 * EPSILON,
            "choices": None,
        }

        def search(depth: int, value: float, gains: List[np.ndarray]) -> None:
            if depth == m:
                if value > best["value"] + EPSILON:
                    best["value"] = value
                    best["choices"] = list(choices)
                return
            bound = value + sum(float(g.max()) for g in gains[depth:]) + open_pairs[depth]
            if bound <= best["value"] + EPSILON:
                return
            i = free[depth]
            for a in self.order[i]:
                choices[i] = a
                extended = list(gains)
                for y in range(depth + 1, m):
                    extended[y] = gains[y] + self.matrix[(i, free[y])][a]
                search(depth + 1, value + float(gains[depth][a]), extended)

        search(0, base_value, gains)

        if best["choices"] is None:
            return incumbent.model_copy(update={"mode": SolverMode.EXACT})
        return self._result(best["choices"], SolverMode.EXACT)

    def greedy(self) -> SelectionResult:
        """Heaviest-edge seed, then best added weight per remaining partition"""
        if self.n == 1:
            return self._result([self.order[0][0]], SolverMode.GREEDY)

        seed: Optional[Tuple[int, int, int, int]] = None
        seed_weight = -np.inf
        for i, k in itertools.combinations(range(self.n), 2):
            weights = self.matrix[(i, k)]
            for a in self.order[i]:
                for b in self.order[k]:
                    if weights[a, b] > seed_weight:
                        seed_weight = weights[a, b]
                        seed = (i, a, k, b)

        assigned: Dict[int, int] = {}
        # Added weight of every open candidate against the assigned ones
        gains = {k: np.zeros(len(self.order[k])) for k in range(self.n)}

        def assign(i: int, a: int) -> None:
            assigned[i] = a
            del gains[i]
            for k in gains:
                gains[k] = gains[k] + self.matrix[(i, k)][a]

        assign(seed[0], seed[1])
        assign(seed[2], seed[3])
        while gains:
            pick: Optional[Tuple[int, int]] = None
            pick_gain = -np.inf
            for k in sorted(gains):
                for b in self.order[k]:
                    if gains[k][b] > pick_gain:
                        pick_gain = gains[k][b]
                        pick = (k, b)
            assign(*pick)

        return self._result([assigned[i] for i in range(self.n)], SolverMode.GREEDY)

    def _result(self, choices: List[int], mode: SolverMode) -> SelectionResult:
        return SelectionResult(
            choices=choices,
            concept_ids=[
                p.candidates[a].concept_id for p, a in zip(self.instance.partitions, choices)
            ],
            objective=self.instance.objective(choices),
            mode=mode,
        )


def solve_max_weight_selection(
    instance: DisambiguationInstance,
    mode: SolverMode = SolverMode.EXACT,
    max_search_space: int = DEFAULT_MAX_SEARCH_SPACE,
) -> SelectionResult:
    """
    Select one concept per mention maximizing the summed pairwise edge weight

    Args:
        instance: Complete n-partite disambiguation graph
        mode: Exact branch-and-bound or greedy
        max_search_space: Exact-mode budget on the number of complete assignments

    Returns:
        Chosen candidates and the objective value
    """
    selector = MaxWeightSelector(instance)
    if mode == SolverMode.GREEDY:
        return selector.greedy()
    return selector.exact(max_search_space)
