"""
Two-level LDA: paragraph-layer w-topic sampler

Every token receives one of three word-level roles (background,
document-specific, theme-specific) by collapsed Gibbs sampling. The prior
belief for each role comes from frequency-derived bias coefficients:
words spread over the whole collection lean towards the background, words
concentrated in one document towards its document-specific model, and
words that recur across documents without being ubiquitous towards the
theme model.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..errors import CorpusValidationError
from ..schemas.corpus import Corpus, Document, FrequencyTables, ParagraphKey, Vocabulary
from ..schemas.model import NUM_WTOPICS, LanguageModels, WTopic, WTopicHyper
from ..services.corpus_loader import build_vocabulary

logger = logging.getLogger(__name__)

UNIFORM_G = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


class EncodedCorpus:
    """
    Flat integer view of a corpus over a fixed vocabulary

    Tokens are stored in corpus order. ``par_offsets[t]:par_offsets[t+1]``
    are the tokens of global paragraph ``t`` and ``doc_offsets[d]:doc_offsets[d+1]``
    the global paragraph indices of document ``d``.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        doc_ids: List[str],
        doc_langs: List[str],
        paragraph_ids: List[List[str]],
        paragraph_words: List[np.ndarray],
    ):
        if len(doc_ids) != len(paragraph_ids) or len(doc_ids) != len(doc_langs):
            raise CorpusValidationError("document metadata lengths disagree")
        self.vocab = vocab
        self.doc_ids = list(doc_ids)
        self.doc_langs = list(doc_langs)
        self.paragraph_ids = [list(p) for p in paragraph_ids]

        doc_sizes = [len(p) for p in self.paragraph_ids]
        self.doc_offsets = np.concatenate([[0], np.cumsum(doc_sizes)]).astype(np.int64)
        if len(paragraph_words) != int(self.doc_offsets[-1]):
            raise CorpusValidationError("paragraph count does not match paragraph ids")

        par_sizes = [len(w) for w in paragraph_words]
        self.par_offsets = np.concatenate([[0], np.cumsum(par_sizes)]).astype(np.int64)
        self.words = (
            np.concatenate(paragraph_words).astype(np.int64)
            if paragraph_words else np.zeros(0, dtype=np.int64)
        )
        if self.words.size and (self.words.min() < 0 or self.words.max() >= vocab.size):
            raise CorpusValidationError("token outside the model vocabulary")

        self.par_doc = np.repeat(np.arange(len(doc_ids), dtype=np.int64), doc_sizes)
        self.token_par = np.repeat(np.arange(len(par_sizes), dtype=np.int64), par_sizes)
        self.token_doc = self.par_doc[self.token_par] if self.words.size else np.zeros(0, np.int64)
        self._doc_index = {doc_id: d for d, doc_id in enumerate(self.doc_ids)}

    @classmethod
    def from_corpus(cls, corpus: Corpus, vocab: Vocabulary) -> "EncodedCorpus":
        paragraph_words = []
        for _, document, _, paragraph in corpus.iter_paragraphs():
            ids = vocab.encode(paragraph.tokens)
            if (ids < 0).any():
                raise CorpusValidationError(
                    f"document '{document.id}' has tokens outside the vocabulary"
                )
            paragraph_words.append(ids)
        return cls(
            vocab=vocab,
            doc_ids=[d.id for d in corpus.documents],
            doc_langs=[d.lang for d in corpus.documents],
            paragraph_ids=[[p.id for p in d.paragraphs] for d in corpus.documents],
            paragraph_words=paragraph_words,
        )

    @property
    def num_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def num_paragraphs(self) -> int:
        return len(self.par_offsets) - 1

    @property
    def num_tokens(self) -> int:
        return int(self.words.size)

    def doc_index(self, doc_id: str) -> Optional[int]:
        return self._doc_index.get(doc_id)

    def paragraph_slice(self, t: int) -> slice:
        return slice(int(self.par_offsets[t]), int(self.par_offsets[t + 1]))

    def doc_paragraphs(self, d: int) -> range:
        return range(int(self.doc_offsets[d]), int(self.doc_offsets[d + 1]))

    def paragraph_key(self, t: int) -> ParagraphKey:
        d = int(self.par_doc[t])
        return self.doc_ids[d], self.paragraph_ids[d][t - int(self.doc_offsets[d])]

    def paragraph_words(self) -> List[np.ndarray]:
        return [self.words[self.paragraph_slice(t)] for t in range(self.num_paragraphs)]


class WTopicState:
    """
    W-topic assignments and the collapsed count tables derived from them

    Attributes:
        s: w-topic per token (0 background, 1 document-specific, 2 theme-specific)
        g: normalized bias coefficients per token, shape (N, 3)
        n_background: background counts per word
        n_doc: document-specific counts, shape (D, W)
        n_doc_total: document-specific totals per document
        n_theme: theme-specific counts per word
        n_par: w-topic counts per paragraph, shape (P, 3)
    """

    def __init__(self, encoded: EncodedCorpus, hyper: WTopicHyper, g: np.ndarray, s: np.ndarray):
        if g.shape != (encoded.num_tokens, NUM_WTOPICS) or s.shape != (encoded.num_tokens,):
            raise ValueError("assignment arrays do not match the corpus")
        self.encoded = encoded
        self.hyper = hyper
        self.g = g
        self.s = s.astype(np.int64)
        counts = recount(self)
        self.n_background = counts["background"]
        self.n_doc = counts["document"]
        self.n_doc_total = counts["document_total"]
        self.n_theme = counts["theme"]
        self.n_par = counts["paragraph"]
        self.background_total = int(self.n_background.sum())
        self.theme_total = int(self.n_theme.sum())

    @property
    def vocab(self) -> Vocabulary:
        return self.encoded.vocab

    def theme_mask(self) -> np.ndarray:
        return self.s == WTopic.THEME

    def remove(self, n: int) -> None:
        """Take token n's current assignment out of every table"""
        self._update(n, -1)

    def add(self, n: int) -> None:
        self._update(n, 1)

    def _update(self, n: int, delta: int) -> None:
        w = self.encoded.words[n]
        l = self.s[n]
        if l == WTopic.BACKGROUND:
            self.n_background[w] += delta
            self.background_total += delta
        elif l == WTopic.DOCUMENT:
            d = self.encoded.token_doc[n]
            self.n_doc[d, w] += delta
            self.n_doc_total[d] += delta
        else:
            self.n_theme[w] += delta
            self.theme_total += delta
        self.n_par[self.encoded.token_par[n], l] += delta


def recount(state: WTopicState) -> Dict[str, np.ndarray]:
    """Count tables rebuilt from scratch out of the assignments"""
    encoded = state.encoded
    W, D = encoded.vocab.size, encoded.num_docs
    words, s = encoded.words, state.s

    background = np.bincount(words[s == WTopic.BACKGROUND], minlength=W).astype(np.int64)
    theme = np.bincount(words[s == WTopic.THEME], minlength=W).astype(np.int64)
    is_doc = s == WTopic.DOCUMENT
    document = np.zeros((D, W), dtype=np.int64)
    np.add.at(document, (encoded.token_doc[is_doc], words[is_doc]), 1)
    paragraph = np.zeros((encoded.num_paragraphs, NUM_WTOPICS), dtype=np.int64)
    np.add.at(paragraph, (encoded.token_par, s), 1)

    return {
        "background": background,
        "document": document,
        "document_total": document.sum(axis=1),
        "theme": theme,
        "paragraph": paragraph,
    }


def check_consistency(state: WTopicState) -> bool:
    """True when every incremental table equals its recount"""
    counts = recount(state)
    return (
        np.array_equal(counts["background"], state.n_background)
        and np.array_equal(counts["document"], state.n_doc)
        and np.array_equal(counts["document_total"], state.n_doc_total)
        and np.array_equal(counts["theme"], state.n_theme)
        and np.array_equal(counts["paragraph"], state.n_par)
        and state.background_total == int(counts["background"].sum())
        and state.theme_total == int(counts["theme"].sum())
    )


def _normalize_g(raw: np.ndarray) -> np.ndarray:
    """Row-normalize raw coefficients; all-zero rows become uniform"""
    totals = raw.sum(axis=1, keepdims=True)
    g = np.divide(raw, totals, out=np.full_like(raw, 1.0 / 3.0), where=totals > 0)
    return g


def compute_g(word: int, doc_id: str, tables: FrequencyTables) -> Tuple[float, float, float]:
    """
    Normalized bias coefficients of one word occurrence

    Raw coefficients:
        g1 = parDF[w] / P
        g2 = docParDF[d][w] / paragraphsInDoc[d]
        g3 = (docDF[w] / |D|) * (1 - g1)

    Args:
        word: Vocabulary index (indices outside the tables count as unseen)
        doc_id: Document of the occurrence
        tables: Training frequency tables

    Returns:
        (g1, g2, g3) summing to 1, uniform for words absent from the tables
    """
    W = tables.par_df.shape[0]
    if word < 0 or word >= W:
        return UNIFORM_G
    g1 = tables.par_df[word] / tables.total_paragraphs
    g3 = tables.doc_df[word] / tables.total_docs * (1.0 - g1)
    row = tables.doc_row(doc_id)
    g2 = 0.0 if row is None else tables.doc_par_df[row, word] / tables.paragraphs_in_doc[row]
    total = g1 + g2 + g3
    if total <= 0.0:
        return UNIFORM_G
    return float(g1 / total), float(g2 / total), float(g3 / total)


def token_g(encoded: EncodedCorpus, tables: FrequencyTables) -> np.ndarray:
    """Vectorized compute_g for every token of an encoded training corpus"""
    words = encoded.words
    rows = [tables.doc_row(doc_id) for doc_id in encoded.doc_ids]
    if any(row is None for row in rows):
        raise CorpusValidationError("frequency tables do not cover every training document")
    rows = np.array(rows, dtype=np.int64)
    doc_rows = rows[encoded.token_doc]

    raw = np.zeros((encoded.num_tokens, NUM_WTOPICS))
    raw[:, 0] = tables.par_df[words] / tables.total_paragraphs
    raw[:, 1] = tables.doc_par_df[doc_rows, words] / tables.paragraphs_in_doc[doc_rows]
    raw[:, 2] = tables.doc_df[words] / tables.total_docs * (1.0 - raw[:, 0])
    return _normalize_g(raw)


def _weights(state: WTopicState, n: int, eta: float, gamma: float) -> Tuple[float, float, float]:
    """Unnormalized conditional of token n; its own assignment must be removed"""
    encoded = state.encoded
    w = encoded.words[n]
    d = encoded.token_doc[n]
    par = state.n_par[encoded.token_par[n]]
    g = state.g[n]
    w_eta = encoded.vocab.size * eta
    par_total = float(par.sum()) + NUM_WTOPICS * gamma

    background = (
        g[0] * (state.n_background[w] + eta) / (state.background_total + w_eta)
        * (par[0] + gamma) / par_total
    )
    document = (
        g[1] * (state.n_doc[d, w] + eta) / (state.n_doc_total[d] + w_eta)
        * (par[1] + gamma) / par_total
    )
    theme = (
        g[2] * (state.n_theme[w] + eta) / (state.theme_total + w_eta)
        * (par[2] + gamma) / par_total
    )
    return float(background), float(document), float(theme)


def sample_wtopic_conditional(
    state: WTopicState, t: int, i: int, hyper: WTopicHyper
) -> np.ndarray:
    """
    Full conditional of the w-topic of token i in paragraph t

    p(s = l) is proportional to
    g_l(w) * (n_w^l + eta) / (n_*^l + W eta) * (n_t^l + gamma) / (n_t^* + 3 gamma),
    with the document-specific table of the token's own document for l = 1.

    The counts must already exclude the token.

    Returns:
        Probability vector of length 3
    """
    n = int(state.encoded.par_offsets[t]) + i
    weights = np.array(_weights(state, n, hyper.eta, hyper.gamma))
    return weights / weights.sum()


def _draw(weights: Tuple[float, float, float], u: float) -> int:
    target = u * (weights[0] + weights[1] + weights[2])
    if target < weights[0]:
        return WTopic.BACKGROUND
    if target < weights[0] + weights[1] or weights[2] <= 0.0:
        return WTopic.DOCUMENT
    return WTopic.THEME


class WTopicSampler:
    """Collapsed Gibbs sampler over w-topic assignments"""

    def __init__(
        self,
        corpus: Corpus,
        tables: FrequencyTables,
        hyper: WTopicHyper,
        vocab: Optional[Vocabulary] = None,
    ):
        self.hyper = hyper
        self.encoded = EncodedCorpus.from_corpus(corpus, vocab or build_vocabulary(corpus))
        self.tables = tables
        self.stats = {
            "tokens": self.encoded.num_tokens,
            "sweeps": 0,
            "changed_last_sweep": 0,
        }

    def initialize(self, rng: np.random.Generator) -> WTopicState:
        """Bias coefficients per token, then s drawn from them"""
        g = token_g(self.encoded, self.tables)
        u = rng.random(self.encoded.num_tokens)
        cumulative = np.cumsum(g, axis=1)
        s = (u[:, None] >= cumulative[:, :-1]).sum(axis=1)
        # g3 == 0 must never be drawn, even at the cumsum's rounding edge
        s = np.where((s == WTopic.THEME) & (g[:, 2] <= 0.0), WTopic.DOCUMENT, s)
        s = np.where((s == WTopic.DOCUMENT) & (g[:, 1] <= 0.0), WTopic.BACKGROUND, s)
        return WTopicState(self.encoded, self.hyper, g, s)

    def sweep(self, state: WTopicState, rng: np.random.Generator) -> int:
        """One decrement/sample/increment pass over every token; returns the number of changes"""
        eta, gamma = self.hyper.eta, self.hyper.gamma
        uniforms = rng.random(state.encoded.num_tokens)
        changed = 0
        for n in range(state.encoded.num_tokens):
            old = state.s[n]
            state.remove(n)
            new = _draw(_weights(state, n, eta, gamma), uniforms[n])
            state.s[n] = new
            state.add(n)
            changed += int(new != old)
        return changed

    def run(
        self, on_sweep: Optional[Callable[[int, WTopicState], None]] = None
    ) -> WTopicState:
        """
        Run the configured number of sweeps

        Args:
            on_sweep: Called with (sweep number, state) after every sweep

        Returns:
            Final sample (counts are not averaged over the chain)
        """
        rng = np.random.default_rng(self.hyper.seed)
        state = self.initialize(rng)
        logger.info(
            "w-topic sampling: %d tokens, %d paragraphs, W=%d, %d sweeps",
            self.encoded.num_tokens, self.encoded.num_paragraphs,
            self.encoded.vocab.size, self.hyper.iterations,
        )
        for sweep in range(1, self.hyper.iterations + 1):
            changed = self.sweep(state, rng)
            self.stats["sweeps"] = sweep
            self.stats["changed_last_sweep"] = changed
            if sweep == self.hyper.burn_in:
                logger.debug("w-topic burn-in complete after %d sweeps", sweep)
            logger.debug("w-topic sweep %d: %d assignments changed", sweep, changed)
            if on_sweep is not None:
                on_sweep(sweep, state)

        shares = np.bincount(state.s, minlength=NUM_WTOPICS) / max(state.s.size, 1)
        logger.info(
            "w-topic sampling done: background %.3f, document %.3f, theme %.3f",
            *shares,
        )
        return state


def run_wtopic_sampler(
    corpus: Corpus,
    tables: FrequencyTables,
    hyper: WTopicHyper,
    vocab: Optional[Vocabulary] = None,
    on_sweep: Optional[Callable[[int, WTopicState], None]] = None,
) -> WTopicState:
    """
    Convenience function to train the w-topic layer

    Args:
        corpus: Training corpus
        tables: Frequency tables of the same corpus over ``vocab``
        hyper: Sampler hyperparameters
        vocab: Model vocabulary (built from the corpus when omitted)
        on_sweep: Optional per-sweep callback

    Returns:
        Final w-topic state
    """
    return WTopicSampler(corpus, tables, hyper, vocab).run(on_sweep)


def infer_wtopics(
    document: Document,
    state: WTopicState,
    tables: FrequencyTables,
    hyper: Optional[WTopicHyper] = None,
    iterations: Optional[int] = None,
) -> List[np.ndarray]:
    """
    W-topics of an unseen document

    Background and theme tables stay frozen; the document gets a fresh
    document-specific table. Collection-level bias coefficients come from
    the training tables, the document-level one from the document itself.
    Words outside the training vocabulary get uniform coefficients.

    Args:
        document: Document not part of the training corpus
        state: Trained w-topic state
        tables: Training frequency tables
        hyper: Sampling hyperparameters (defaults to the state's)
        iterations: Sweep count (defaults to hyper.iterations)

    Returns:
        One array of w-topics per paragraph
    """
    hyper = hyper or state.hyper
    sweeps = hyper.iterations if iterations is None else iterations
    rng = np.random.default_rng(hyper.seed)
    vocab = state.vocab
    eta, gamma = hyper.eta, hyper.gamma
    w_eta = vocab.size * eta

    keys = [[token.key for token in p.tokens] for p in document.paragraphs]
    local_df: Dict[str, int] = {}
    for paragraph_keys in keys:
        for key in set(paragraph_keys):
            local_df[key] = local_df.get(key, 0) + 1

    flat_keys = [key for paragraph_keys in keys for key in paragraph_keys]
    flat_par = np.repeat(np.arange(len(keys)), [len(k) for k in keys])
    words = np.array([vocab.index_of(k) if k in vocab else -1 for k in flat_keys], dtype=np.int64)

    raw = np.zeros((len(flat_keys), NUM_WTOPICS))
    known = words >= 0
    raw[known, 0] = tables.par_df[words[known]] / tables.total_paragraphs
    raw[known, 2] = tables.doc_df[words[known]] / tables.total_docs * (1.0 - raw[known, 0])
    raw[:, 1] = [local_df[k] / len(keys) for k in flat_keys]
    g = _normalize_g(raw)
    g[~known] = UNIFORM_G

    cumulative = np.cumsum(g, axis=1)
    s = (rng.random(len(flat_keys))[:, None] >= cumulative[:, :-1]).sum(axis=1)
    doc_counts: Dict[str, int] = {}
    n_par = np.zeros((len(keys), NUM_WTOPICS), dtype=np.int64)
    for n, key in enumerate(flat_keys):
        n_par[flat_par[n], s[n]] += 1
        if s[n] == WTopic.DOCUMENT:
            doc_counts[key] = doc_counts.get(key, 0) + 1
    doc_total = sum(doc_counts.values())

    for _ in range(sweeps):
        uniforms = rng.random(len(flat_keys))
        for n, key in enumerate(flat_keys):
            t, w, old = flat_par[n], words[n], s[n]
            n_par[t, old] -= 1
            if old == WTopic.DOCUMENT:
                doc_counts[key] -= 1
                doc_total -= 1
            background = state.n_background[w] if w >= 0 else 0
            theme = state.n_theme[w] if w >= 0 else 0
            weights = (
                g[n, 0] * (background + eta) / (state.background_total + w_eta) * (n_par[t, 0] + gamma),
                g[n, 1] * (doc_counts.get(key, 0) + eta) / (doc_total + w_eta) * (n_par[t, 1] + gamma),
                g[n, 2] * (theme + eta) / (state.theme_total + w_eta) * (n_par[t, 2] + gamma),
            )
            new = _draw(weights, uniforms[n])
            s[n] = new
            n_par[t, new] += 1
            if new == WTopic.DOCUMENT:
                doc_counts[key] = doc_counts.get(key, 0) + 1
                doc_total += 1

    offsets = np.concatenate([[0], np.cumsum([len(k) for k in keys])])
    return [s[offsets[t]:offsets[t + 1]].astype(np.int64) for t in range(len(keys))]


def _ranked(counts: np.ndarray, candidates: np.ndarray, top_n: int, vocab: Vocabulary) -> List[str]:
    # Smoothing is monotone in the count, so ranking by count is ranking by probability
    order = candidates[np.argsort(-counts[candidates], kind="stable")]
    return [vocab.word(int(w)) for w in order[:top_n]]


def export_language_models(
    state: WTopicState, top_n: int = 20, by_language: bool = True
) -> LanguageModels:
    """
    Ranked word lists of the background, document-specific and theme-specific models

    Words are ranked by (n_w^l + eta) / (n_*^l + W eta), ties in vocabulary
    order. Per-language background lists only rank words that occur in
    documents of that language.

    Args:
        state: Trained w-topic state
        top_n: List length (truncated to the vocabulary size)
        by_language: Also export one background list per language

    Returns:
        Language model export
    """
    encoded = state.encoded
    vocab = encoded.vocab
    everything = np.arange(vocab.size)

    per_language: Dict[str, List[str]] = {}
    if by_language:
        langs = np.array(encoded.doc_langs)[encoded.token_doc]
        for lang in sorted(set(encoded.doc_langs)):
            in_lang = langs == lang
            present = np.unique(encoded.words[in_lang])
            background = np.bincount(
                encoded.words[in_lang & (state.s == WTopic.BACKGROUND)], minlength=vocab.size
            )
            per_language[lang] = _ranked(background, present, top_n, vocab)

    return LanguageModels(
        background=_ranked(state.n_background, everything, top_n, vocab),
        background_by_language=per_language,
        document_specific={
            doc_id: _ranked(state.n_doc[d], everything, top_n, vocab)
            for d, doc_id in enumerate(encoded.doc_ids)
        },
        theme_specific=_ranked(state.n_theme, everything, top_n, vocab),
    )
