"""Log-space Viterbi decoding for discrete-state chains"""

from typing import List, Sequence, Tuple

import numpy as np


def viterbi(
    log_init: np.ndarray, log_trans: np.ndarray, log_emit: np.ndarray
) -> Tuple[List[int], float]:
    """
    Most probable state sequence

    Ties are broken towards the lower state index, both in the back-pointers
    and in the final state.

    Args:
        log_init: Initial log-probabilities, shape (K,)
        log_trans: Transition log-probabilities, shape (K, K), rows are "from"
        log_emit: Emission log-probabilities, shape (T, K)

    Returns:
        (state sequence of length T, its joint log-probability)
    """
    T, K = log_emit.shape
    if T == 0:
        return [], 0.0
    if log_init.shape != (K,) or log_trans.shape != (K, K):
        raise ValueError("initial/transition shapes do not match the emissions")

    delta = log_init + log_emit[0]
    backpointers = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        scores = delta[:, None] + log_trans
        # np.argmax returns the first maximum, i.e. the lowest index
        backpointers[t] = np.argmax(scores, axis=0)
        delta = scores[backpointers[t], np.arange(K)] + log_emit[t]

    path = [int(np.argmax(delta))]
    for t in range(T - 1, 0, -1):
        path.append(int(backpointers[t, path[-1]]))
    path.reverse()
    return path, float(delta[path[-1]])


def sequence_log_probability(
    log_init: np.ndarray,
    log_trans: np.ndarray,
    log_emit: np.ndarray,
    path: Sequence[int],
) -> float:
    """Joint log-probability of one state sequence under the same model"""
    if len(path) == 0:
        return 0.0
    total = float(log_init[path[0]] + log_emit[0, path[0]])
    for t in range(1, len(path)):
        total += float(log_trans[path[t - 1], path[t]] + log_emit[t, path[t]])
    return total
