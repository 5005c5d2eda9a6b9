"""Log-space Viterbi decoding against exhaustive enumeration"""

import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from themealign.core.viterbi import sequence_log_probability, viterbi


def random_chain(rng, K, T):
    def log_rows(shape):
        p = rng.random(shape) + 1e-3
        return np.log(p / p.sum(axis=-1, keepdims=True))

    return log_rows(K), log_rows((K, K)), np.log(rng.random((T, K)) + 1e-3)


def exhaustive(log_init, log_trans, log_emit):
    T, K = log_emit.shape
    return max(
        sequence_log_probability(log_init, log_trans, log_emit, path)
        for path in itertools.product(range(K), repeat=T)
    )


class TestViterbi:

    def test_random_instances_match_enumeration(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            K, T = int(rng.integers(1, 5)), int(rng.integers(1, 9))
            log_init, log_trans, log_emit = random_chain(rng, K, T)
            path, logprob = viterbi(log_init, log_trans, log_emit)
            assert len(path) == T
            best = exhaustive(log_init, log_trans, log_emit)
            assert abs(logprob - best) <= 1e-9
            assert abs(sequence_log_probability(log_init, log_trans, log_emit, path) - best) <= 1e-9

    @settings(max_examples=40, deadline=None)
    @given(K=st.integers(1, 4), T=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
    def test_decoded_path_scores_its_logprob(self, K, T, seed):
        log_init, log_trans, log_emit = random_chain(np.random.default_rng(seed), K, T)
        path, logprob = viterbi(log_init, log_trans, log_emit)
        assert np.isclose(sequence_log_probability(log_init, log_trans, log_emit, path), logprob)

    def test_empty_sequence(self):
        path, logprob = viterbi(np.zeros(3), np.zeros((3, 3)), np.zeros((0, 3)))
        assert path == []
        assert logprob == 0.0

    def test_ties_go_to_lower_state(self):
        path, _ = viterbi(np.zeros(3), np.zeros((3, 3)), np.zeros((4, 3)))
        assert path == [0, 0, 0, 0]

    def test_sticky_transitions_smooth_noise(self):
        stay = np.log(np.array([[0.99, 0.01], [0.01, 0.99]]))
        emit = np.log(np.array([[0.9, 0.1], [0.9, 0.1], [0.4, 0.6], [0.9, 0.1]]))
        path, _ = viterbi(np.log([0.5, 0.5]), stay, emit)
        assert path == [0, 0, 0, 0]
