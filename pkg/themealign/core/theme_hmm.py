"""
Sticky-HMM theme sampler

Assigns one t-topic per paragraph by collapsed Gibbs sampling. A
paragraph's conditional multiplies the document's topic mixture, the
transitions from the previous and into the next paragraph (a Dirichlet
prior with a self-transition bonus kappa makes states persist), the
likelihood of its theme-specific tokens and, for concept tokens, a boost
towards the topics that the concept's related concepts already carry.

Final assignments come from Viterbi decoding under point estimates of
the collapsed parameters.
"""

import logging
from collections import Counter
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from ..schemas.corpus import CONCEPT_PATTERN, Document, Vocabulary
from ..schemas.model import ThemeDiagnostics, ThemeHyper, WTopic
from .lda2 import EncodedCorpus, WTopicState
from .relations import RelationGraph
from .viterbi import sequence_log_probability as chain_log_probability
from .viterbi import viterbi

logger = logging.getLogger(__name__)


class ThemeState:
    """
    Paragraph t-topics and the collapsed count tables

    Attributes:
        z: t-topic per global paragraph
        topic_word: theme-token counts per topic, shape (K, W)
        topic_totals: theme tokens per topic
        doc_topic: paragraphs per document and topic, shape (D, K)
        trans: transition counts pooled over documents, shape (K, K)
        initial: first-paragraph topic counts
    """

    def __init__(
        self,
        encoded: EncodedCorpus,
        hyper: ThemeHyper,
        theme_words: List[np.ndarray],
        z: np.ndarray,
    ):
        if len(theme_words) != encoded.num_paragraphs or z.shape != (encoded.num_paragraphs,):
            raise ValueError("theme assignments do not match the corpus")
        if z.size and (z.min() < 0 or z.max() >= hyper.k):
            raise ValueError(f"t-topics must lie in [0, {hyper.k})")
        self.encoded = encoded
        self.hyper = hyper
        self.k = hyper.k
        self.z = z.astype(np.int64)

        self.par_words: List[np.ndarray] = []
        self.par_counts: List[np.ndarray] = []
        for words in theme_words:
            unique, counts = np.unique(np.asarray(words, dtype=np.int64), return_counts=True)
            self.par_words.append(unique)
            self.par_counts.append(counts.astype(np.int64))
        self.par_sizes = np.array([int(c.sum()) for c in self.par_counts], dtype=np.int64)

        starts = encoded.doc_offsets[:-1]
        ends = encoded.doc_offsets[1:] - 1
        self.is_first = np.zeros(encoded.num_paragraphs, dtype=bool)
        self.is_last = np.zeros(encoded.num_paragraphs, dtype=bool)
        self.is_first[starts] = True
        self.is_last[ends] = True

        counts = recount_theme(self)
        self.topic_word = counts["topic_word"]
        self.topic_totals = counts["topic_totals"]
        self.doc_topic = counts["doc_topic"]
        self.trans = counts["trans"]
        self.initial = counts["initial"]

    @property
    def vocab(self) -> Vocabulary:
        return self.encoded.vocab

    def document_topics(self, d: int) -> List[int]:
        return [int(j) for j in self.z[self.encoded.doc_paragraphs(d)]]

    def mean_switches(self) -> float:
        """Mean number of topic changes between consecutive paragraphs per document"""
        switches = [
            int(np.count_nonzero(np.diff(self.z[self.encoded.doc_paragraphs(d)])))
            for d in range(self.encoded.num_docs)
        ]
        return float(np.mean(switches)) if switches else 0.0

    def remove_paragraph(self, t: int) -> None:
        self._update(t, -1)

    def add_paragraph(self, t: int) -> None:
        self._update(t, 1)

    def _update(self, t: int, delta: int) -> None:
        j = self.z[t]
        self.doc_topic[self.encoded.par_doc[t], j] += delta
        if self.is_first[t]:
            self.initial[j] += delta
        else:
            self.trans[self.z[t - 1], j] += delta
        if not self.is_last[t]:
            self.trans[j, self.z[t + 1]] += delta
        self.topic_word[j, self.par_words[t]] += delta * self.par_counts[t]
        self.topic_totals[j] += delta * self.par_sizes[t]


def recount_theme(state: ThemeState) -> Dict[str, np.ndarray]:
    """Theme count tables rebuilt from the paragraph assignments"""
    encoded = state.encoded
    K, W = state.k, encoded.vocab.size
    z = state.z

    topic_word = np.zeros((K, W), dtype=np.int64)
    for t in range(encoded.num_paragraphs):
        topic_word[z[t], state.par_words[t]] += state.par_counts[t]
    doc_topic = np.zeros((encoded.num_docs, K), dtype=np.int64)
    np.add.at(doc_topic, (encoded.par_doc, z), 1)

    follows = ~state.is_first
    trans = np.zeros((K, K), dtype=np.int64)
    previous = np.flatnonzero(follows) - 1
    np.add.at(trans, (z[previous], z[follows]), 1)
    initial = np.bincount(z[state.is_first], minlength=K).astype(np.int64)

    return {
        "topic_word": topic_word,
        "topic_totals": topic_word.sum(axis=1),
        "doc_topic": doc_topic,
        "trans": trans,
        "initial": initial,
    }


def check_theme_consistency(state: ThemeState) -> bool:
    counts = recount_theme(state)
    return all(
        np.array_equal(counts[name], getattr(state, name))
        for name in ("topic_word", "topic_totals", "doc_topic", "trans", "initial")
    )


def transition_probability(j: int, k: int, state: ThemeState, hyper: ThemeHyper) -> float:
    """
    Smoothed transition probability j -> k

    (trans[j][k] + alpha + kappa * [j == k]) / (sum_x trans[j][x] + K alpha + kappa)
    """
    row = state.trans[j]
    bonus = hyper.kappa if j == k else 0.0
    return float(
        (row[k] + hyper.alpha + bonus) / (row.sum() + hyper.k * hyper.alpha + hyper.kappa)
    )


def transition_matrix(state: ThemeState, hyper: ThemeHyper) -> np.ndarray:
    """All transition probabilities; every row sums to 1"""
    numerator = state.trans + hyper.alpha + hyper.kappa * np.eye(hyper.k)
    return numerator / numerator.sum(axis=1, keepdims=True)


def initial_distribution(state: ThemeState, hyper: ThemeHyper) -> np.ndarray:
    return (state.initial + hyper.lam) / (state.initial.sum() + hyper.k * hyper.lam)


class NeighborIndex:
    """Vocabulary positions of every concept's related concepts"""

    def __init__(self, vocab: Vocabulary, graph: RelationGraph):
        self.vocab = vocab
        self.graph = graph
        self._cache: Dict[str, Optional[Tuple[np.ndarray, int]]] = {}

    def lookup(self, key: str) -> Optional[Tuple[np.ndarray, int]]:
        """
        In-vocabulary neighbor indices and the number of neighbors outside it

        Returns None for plain words and for concepts without relations.
        """
        if key in self._cache:
            return self._cache[key]
        entry = None
        if CONCEPT_PATTERN.match(key):
            neighbors = self.graph.neighbors(key)
            if neighbors:
                known = [self.vocab.index_of(r) for r in neighbors if r in self.vocab]
                entry = (np.array(known, dtype=np.int64), len(neighbors) - len(known))
        self._cache[key] = entry
        return entry


def boost_vector(key: str, topic_word: np.ndarray, index: NeighborIndex) -> np.ndarray:
    """
    Boost of every topic for one concept token

    Mean over related concepts of the share of their assignments that went
    to each topic; neighbors never assigned contribute 1/K. Plain words and
    unrelated concepts get 1 for every topic.
    """
    K = topic_word.shape[0]
    entry = index.lookup(key)
    if entry is None:
        return np.ones(K)
    known, unknown = entry
    columns = topic_word[:, known].astype(float)
    totals = columns.sum(axis=0)
    shares = np.divide(columns, totals, out=np.full_like(columns, 1.0 / K), where=totals > 0)
    return (shares.sum(axis=1) + unknown / K) / (known.size + unknown)


def concept_boost(word: str, j: int, state: ThemeState, graph: RelationGraph) -> float:
    """Boost s_wkn(w | j) of topic j for concept ``word``, in [0, 1]"""
    return float(boost_vector(word, state.topic_word, NeighborIndex(state.vocab, graph))[j])


def _log_conditional(
    state: ThemeState,
    t: int,
    hyper: ThemeHyper,
    neighbors: Optional[NeighborIndex],
) -> np.ndarray:
    """Normalized log conditional of paragraph t; its contributions must be removed"""
    K = hyper.k
    lam, alpha, kappa, beta = hyper.lam, hyper.alpha, hyper.kappa, hyper.beta
    topics = np.arange(K)

    mixture = state.doc_topic[state.encoded.par_doc[t]]
    log_p = np.log(mixture + lam) - np.log(mixture.sum() + K * lam)

    if hyper.use_transitions:
        previous = None if state.is_first[t] else int(state.z[t - 1])
        if previous is None:
            log_p += np.log(initial_distribution(state, hyper))
        else:
            row = state.trans[previous]
            log_p += np.log(
                (row + alpha + kappa * (topics == previous))
                / (row.sum() + K * alpha + kappa)
            )
        if not state.is_last[t]:
            following = int(state.z[t + 1])
            # Exact collapsed correction: the transition previous -> j is already in the counts
            same = (topics == previous).astype(float) if previous is not None else np.zeros(K)
            numerator = (
                state.trans[:, following] + alpha + kappa * (topics == following)
                + same * (topics == following)
            )
            denominator = state.trans.sum(axis=1) + K * alpha + kappa + same
            log_p += np.log(numerator / denominator)

    words, counts = state.par_words[t], state.par_counts[t]
    if words.size:
        w_beta = state.vocab.size * beta
        current = state.topic_word[:, words]
        log_p += (gammaln(current + counts + beta) - gammaln(current + beta)).sum(axis=1)
        log_p -= gammaln(state.topic_totals + counts.sum() + w_beta) - gammaln(
            state.topic_totals + w_beta
        )
        if neighbors is not None:
            for w, c in zip(words, counts):
                boost = boost_vector(state.vocab.word(int(w)), state.topic_word, neighbors)
                log_p += c * hyper.boost_exponent * np.log(np.maximum(boost, hyper.boost_floor))

    return log_p - logsumexp(log_p)


def sample_ttopic_conditional(
    state: ThemeState,
    t: int,
    hyper: ThemeHyper,
    graph: Optional[RelationGraph] = None,
) -> np.ndarray:
    """
    Full conditional of the t-topic of global paragraph t

    The state must not contain paragraph t's contributions.

    Returns:
        Probability vector of length K
    """
    neighbors = (
        NeighborIndex(state.vocab, graph)
        if hyper.use_concept_boost and graph is not None else None
    )
    return np.exp(_log_conditional(state, t, hyper, neighbors))


class ThemeSampler:
    """Collapsed Gibbs sampler over paragraph t-topics"""

    def __init__(
        self,
        wstate: WTopicState,
        hyper: ThemeHyper,
        graph: Optional[RelationGraph] = None,
    ):
        self.wstate = wstate
        self.hyper = hyper
        self.encoded = wstate.encoded
        self.neighbors = (
            NeighborIndex(self.encoded.vocab, graph)
            if hyper.use_concept_boost and graph is not None else None
        )
        mask = wstate.theme_mask()
        self.theme_words = [
            self.encoded.words[self.encoded.paragraph_slice(t)][mask[self.encoded.paragraph_slice(t)]]
            for t in range(self.encoded.num_paragraphs)
        ]
        self.stats = {
            "paragraphs": self.encoded.num_paragraphs,
            "theme_tokens": int(mask.sum()),
            "sweeps": 0,
            "changed_last_sweep": 0,
        }

    def initialize(self, rng: np.random.Generator) -> ThemeState:
        """Topics drawn uniformly at random"""
        z = rng.integers(0, self.hyper.k, size=self.encoded.num_paragraphs)
        return ThemeState(self.encoded, self.hyper, self.theme_words, z)

    def sweep(self, state: ThemeState, rng: np.random.Generator) -> int:
        """Resample every paragraph in document order; returns the number of changes"""
        uniforms = rng.random(self.encoded.num_paragraphs)
        changed = 0
        for t in range(self.encoded.num_paragraphs):
            old = state.z[t]
            state.remove_paragraph(t)
            probabilities = np.exp(_log_conditional(state, t, self.hyper, self.neighbors))
            cumulative = np.cumsum(probabilities)
            new = min(
                int(np.searchsorted(cumulative, uniforms[t] * cumulative[-1], side="right")),
                self.hyper.k - 1,
            )
            # Theme tokens follow their paragraph's topic
            state.z[t] = new
            state.add_paragraph(t)
            changed += int(new != old)
        return changed

    def run(
        self, on_sweep: Optional[Callable[[int, ThemeState], None]] = None
    ) -> ThemeState:
        """
        Run the configured number of sweeps

        Args:
            on_sweep: Called with (sweep number, state) after every sweep

        Returns:
            Final sample
        """
        rng = np.random.default_rng(self.hyper.seed)
        state = self.initialize(rng)
        logger.info(
            "theme sampling: K=%d, %d paragraphs, %d theme tokens, transitions=%s, boost=%s",
            self.hyper.k, self.encoded.num_paragraphs, self.stats["theme_tokens"],
            self.hyper.use_transitions, self.neighbors is not None,
        )
        for sweep in range(1, self.hyper.iterations + 1):
            changed = self.sweep(state, rng)
            self.stats["sweeps"] = sweep
            self.stats["changed_last_sweep"] = changed
            if sweep == self.hyper.burn_in:
                logger.debug("theme burn-in complete after %d sweeps", sweep)
            logger.debug("theme sweep %d: %d paragraphs changed", sweep, changed)
            if on_sweep is not None:
                on_sweep(sweep, state)

        logger.info(
            "theme sampling done: %.2f topic switches per document", state.mean_switches()
        )
        return state


def run_theme_sampler(
    wstate: WTopicState,
    hyper: ThemeHyper,
    graph: Optional[RelationGraph] = None,
    on_sweep: Optional[Callable[[int, ThemeState], None]] = None,
) -> ThemeState:
    """
    Convenience function to train the theme layer on frozen w-topics

    Args:
        wstate: Trained w-topic state; only theme-specific tokens participate
        hyper: Sampler hyperparameters
        graph: Concept relations for the boost (ignored when the boost is disabled)
        on_sweep: Optional per-sweep callback

    Returns:
        Final theme state
    """
    return ThemeSampler(wstate, hyper, graph).run(on_sweep)


def theme_diagnostics(state: ThemeState) -> ThemeDiagnostics:
    """Documents and paragraphs whose topics rest on mixture and transitions alone"""
    encoded = state.encoded
    empty_docs = [
        doc_id
        for d, doc_id in enumerate(encoded.doc_ids)
        if int(state.par_sizes[encoded.doc_paragraphs(d)].sum()) == 0
    ]
    if empty_docs:
        logger.warning("%d documents have no theme-specific tokens", len(empty_docs))
    return ThemeDiagnostics(
        documents_without_theme_tokens=empty_docs,
        paragraphs_without_theme_tokens=int(np.count_nonzero(state.par_sizes == 0)),
        theme_tokens=int(state.par_sizes.sum()),
    )


def topic_language_models(state: ThemeState, top_n: int = 20) -> Dict[int, List[str]]:
    """Top theme words per t-topic"""
    vocab = state.vocab
    return {
        j: [
            vocab.word(int(w))
            for w in np.argsort(-state.topic_word[j], kind="stable")[:top_n]
        ]
        for j in range(state.k)
    }


class ThemeDecoder:
    """
    Viterbi decoding under point estimates of a trained theme state

    Emission of topic j for a paragraph is the product of its theme-token
    probabilities (n_jw + beta) / (n_j + W beta), times the concept boost when
    enabled, times the document's topic mixture for training documents when
    ``decode_with_mixture`` is set. Words outside the vocabulary get
    beta / (n_j + W beta).
    """

    def __init__(
        self,
        state: ThemeState,
        hyper: ThemeHyper,
        graph: Optional[RelationGraph] = None,
    ):
        self.state = state
        self.hyper = hyper
        K = hyper.k
        denominator = state.topic_totals + state.vocab.size * hyper.beta
        self.log_phi = np.log(state.topic_word + hyper.beta) - np.log(denominator)[:, None]
        self.log_unseen = np.log(hyper.beta) - np.log(denominator)
        if hyper.use_transitions:
            self.log_init = np.log(initial_distribution(state, hyper))
            self.log_trans = np.log(transition_matrix(state, hyper))
        else:
            self.log_init = np.zeros(K)
            self.log_trans = np.zeros((K, K))
        self.neighbors = (
            NeighborIndex(state.vocab, graph)
            if hyper.use_concept_boost and graph is not None else None
        )

    def emissions(self, theme_keys: Sequence[Sequence[str]], doc_index: Optional[int] = None) -> np.ndarray:
        """Log emission matrix (T, K) for paragraphs given by their theme-token keys"""
        hyper = self.hyper
        emit = np.zeros((len(theme_keys), hyper.k))
        for t, keys in enumerate(theme_keys):
            for key, count in Counter(keys).items():
                w = self.state.vocab.index_of(key)
                emit[t] += count * (self.log_phi[:, w] if w is not None else self.log_unseen)
                if self.neighbors is not None:
                    boost = boost_vector(key, self.state.topic_word, self.neighbors)
                    emit[t] += count * hyper.boost_exponent * np.log(
                        np.maximum(boost, hyper.boost_floor)
                    )
        if hyper.decode_with_mixture and doc_index is not None:
            mixture = self.state.doc_topic[doc_index]
            emit += np.log(mixture + hyper.lam) - np.log(mixture.sum() + hyper.k * hyper.lam)
        return emit

    def decode(self, theme_keys: Sequence[Sequence[str]], doc_index: Optional[int] = None) -> List[int]:
        path, _ = viterbi(self.log_init, self.log_trans, self.emissions(theme_keys, doc_index))
        return path

    def log_probability(
        self,
        theme_keys: Sequence[Sequence[str]],
        z: Sequence[int],
        doc_index: Optional[int] = None,
    ) -> float:
        return chain_log_probability(
            self.log_init, self.log_trans, self.emissions(theme_keys, doc_index), z
        )

    def training_keys(self, d: int) -> List[List[str]]:
        """Theme-token keys of a training document, paragraph by paragraph"""
        vocab = self.state.vocab
        keys = []
        for t in self.state.encoded.doc_paragraphs(d):
            keys.append(
                [
                    vocab.word(int(w))
                    for w, c in zip(self.state.par_words[t], self.state.par_counts[t])
                    for _ in range(int(c))
                ]
            )
        return keys

    def decode_training(self) -> Dict[str, List[int]]:
        """Viterbi topics of every training document"""
        return {
            doc_id: self.decode(self.training_keys(d), d)
            for d, doc_id in enumerate(self.state.encoded.doc_ids)
        }


def theme_keys(document: Document, wtopics: Optional[Sequence[np.ndarray]] = None) -> List[List[str]]:
    """Keys of the theme-specific tokens of each paragraph (all tokens when w-topics are absent)"""
    if wtopics is None:
        return [[token.key for token in p.tokens] for p in document.paragraphs]
    return [
        [token.key for token, s in zip(p.tokens, topics) if s == WTopic.THEME]
        for p, topics in zip(document.paragraphs, wtopics)
    ]


def viterbi_decode(
    document: Document,
    state: ThemeState,
    hyper: ThemeHyper,
    graph: Optional[RelationGraph] = None,
    wtopics: Optional[Sequence[np.ndarray]] = None,
) -> List[int]:
    """
    Most probable t-topic sequence of a document

    Args:
        document: Document to decode
        state: Trained theme state
        hyper: Theme hyperparameters
        graph: Concept relations for the boost
        wtopics: Per-paragraph w-topics; only theme-specific tokens are emitted

    Returns:
        One topic per paragraph
    """
    decoder = ThemeDecoder(state, hyper, graph)
    return decoder.decode(theme_keys(document, wtopics), state.encoded.doc_index(document.id))


def sequence_log_probability(
    document: Document,
    z: Sequence[int],
    state: ThemeState,
    hyper: ThemeHyper,
    graph: Optional[RelationGraph] = None,
    wtopics: Optional[Sequence[np.ndarray]] = None,
) -> float:
    """Log-probability of a topic sequence under the decoding model"""
    decoder = ThemeDecoder(state, hyper, graph)
    return decoder.log_probability(
        theme_keys(document, wtopics), z, state.encoded.doc_index(document.id)
    )
