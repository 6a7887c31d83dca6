"""Full model state: hierarchy counts, network state, checkpointing.

The state is a flat bundle of numpy arrays shaped for the kernels
module.  Documents are the *training* documents of the corpus, indexed
0..D-1 in corpus order; the citation graph is restricted to the same
subset.  See kernels.py for the level layout.
"""

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import gammaln

from . import kernels, stirling
from .kernels import (L_ROOT, L_AUTHOR, L_DOCPRIOR, L_DOC,
                      L_BACKGROUND, L_TOPICWORD, L_BURST, N_LEVELS)

VARIANTS = ("full", "no_network", "atm", "hdp_lda_bursty")
CHECKPOINT_VERSION = 1

TOPIC_LEVELS = (L_ROOT, L_AUTHOR, L_DOCPRIOR, L_DOC)
WORD_LEVELS = (L_BACKGROUND, L_TOPICWORD, L_BURST)


@dataclass
class ModelConfig:
    topic_cap: int
    disc_topic: float = 0.01
    disc_word: float = 0.7
    beta0: float = 0.1
    tau0: float = 1.0
    tau1: float = 1.0
    eps0: float = 1.0
    eps1: float = 1.0
    iterations: int = 2000
    network_start: int = 1000
    variant: str = "full"
    seed: int = 0
    sample_hyper: bool = True

    def __post_init__(self):
        if self.topic_cap < 1:
            raise ValueError("topic_cap must be at least 1")
        for d in (self.disc_topic, self.disc_word):
            if not 0.0 <= d < 1.0:
                raise ValueError(f"discount must be in [0, 1), got {d}")
        if self.beta0 <= 0.0:
            raise ValueError("beta0 must be positive")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.iterations < 0 or self.network_start < 0:
            raise ValueError("iteration counts must be non-negative")

    @property
    def has_doc_prior(self):
        return self.variant != "atm"

    @property
    def uses_network(self):
        return self.variant == "full"

    def discounts(self):
        d = np.empty(N_LEVELS)
        d[list(TOPIC_LEVELS)] = self.disc_topic
        d[list(WORD_LEVELS)] = self.disc_word
        return d


def corpus_fingerprint(corpus, graph):
    """Cheap identity of a (corpus, graph) pair for checkpoint safety."""
    payload = json.dumps([
        corpus.n_documents, len(corpus.vocabulary), len(corpus.authors),
        [d.id for d in corpus.documents[:50]],
        [d.split for d in corpus.documents[:50]],
        int(graph.n_edges),
    ]).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


class ModelState:
    """Mutable sampling state for one chain.  Build via init_random or
    load_checkpoint; fields are the arrays documented in kernels.py."""

    def __init__(self, config):
        self.config = config
        self.iteration = 0
        self.network_initialized = False
        self.fingerprint = None
        self.caches = None
        self.rng_state = None
        self.rng = None

    # -- wiring helpers ------------------------------------------------

    @property
    def n_topics_active(self):
        return int(np.count_nonzero(self.root_c))

    @property
    def has_dp(self):
        return 1 if self.config.has_doc_prior else 0

    def tables(self):
        return tuple(self.caches[lv].table for lv in range(N_LEVELS))

    def grow(self, need):
        level, n, m = int(need[0]), int(need[1]), int(need[2])
        self.caches[level].ensure(n, min(m, n))

    # -- probability estimates (count-based CRP recovery) --------------

    def root_probs(self):
        w = self.root_c - self.disc[L_ROOT] * self.root_t
        total = w.sum()
        if total <= 0.0:
            return np.zeros_like(w, dtype=np.float64)
        return np.maximum(w, 0.0) / total

    def _blend(self, level, parent_probs, c, t, C, T):
        a = self.disc[level]
        b = self.conc[level]
        scale = (a * T + b) / (b + C)
        out = scale[..., None] * parent_probs + \
            (c - a * t) / (b + C)[..., None]
        return out

    def author_probs(self):
        root = self.root_probs()
        return self._blend(L_AUTHOR, root[None, :], self.au_c, self.au_t,
                           self.au_tot[:, 0].astype(np.float64),
                           self.au_tot[:, 1].astype(np.float64))

    def docprior_probs(self):
        nu = self.author_probs()
        parent = nu[self.doc_author]
        if not self.config.has_doc_prior:
            return parent
        return self._blend(L_DOCPRIOR, parent, self.dp_c, self.dp_t,
                           self.dp_tot[:, 0].astype(np.float64),
                           self.dp_tot[:, 1].astype(np.float64))

    def doc_probs(self):
        parent = self.docprior_probs()
        return self._blend(L_DOC, parent, self.doc_c, self.doc_t,
                           self.doc_tot[:, 0].astype(np.float64),
                           self.doc_tot[:, 1].astype(np.float64))

    def background_probs(self):
        base = np.full(self.n_vocab, 1.0 / self.n_vocab)
        return self._blend(L_BACKGROUND, base, self.bg_c, self.bg_t,
                           np.float64(self.bg_tot[0]),
                           np.float64(self.bg_tot[1]))

    def word_probs(self):
        bg = self.background_probs()
        return self._blend(L_TOPICWORD, bg[None, :], self.tw_c, self.tw_t,
                           self.tw_tot[:, 0].astype(np.float64),
                           self.tw_tot[:, 1].astype(np.float64))

    # -- joint likelihood ----------------------------------------------

    def _group_marginal(self, level, c2, t2, C, T):
        a = self.disc[level]
        b = self.conc[level]
        C = np.asarray(C, dtype=np.float64)
        T = np.asarray(T, dtype=np.float64)
        if a > 0.0:
            top = T * np.log(a) + gammaln(b / a + T) - gammaln(b / a)
        else:
            top = T * np.log(b)
        bottom = gammaln(b + C) - gammaln(b)
        cache = self.caches[level]
        cflat = np.asarray(c2).ravel()
        tflat = np.asarray(t2).ravel()
        cmax = int(cflat.max()) if cflat.size else 0
        tmax = int(tflat.max()) if tflat.size else 0
        cache.ensure(max(cmax, 1), max(min(tmax, cmax), 1))
        stir = cache.table[cflat, tflat].sum()
        return float(np.sum(top - bottom) + stir)

    def log_joint(self):
        total = self._group_marginal(
            L_ROOT, self.root_c, self.root_t,
            self.root_tot[0], self.root_tot[1])
        total += self._group_marginal(
            L_AUTHOR, self.au_c, self.au_t,
            self.au_tot[:, 0], self.au_tot[:, 1])
        if self.config.has_doc_prior:
            total += self._group_marginal(
                L_DOCPRIOR, self.dp_c, self.dp_t,
                self.dp_tot[:, 0], self.dp_tot[:, 1])
        total += self._group_marginal(
            L_DOC, self.doc_c, self.doc_t,
            self.doc_tot[:, 0], self.doc_tot[:, 1])
        total += self._group_marginal(
            L_BACKGROUND, self.bg_c, self.bg_t,
            self.bg_tot[0], self.bg_tot[1])
        total += self._group_marginal(
            L_TOPICWORD, self.tw_c, self.tw_t,
            self.tw_tot[:, 0], self.tw_tot[:, 1])
        total += self._group_marginal(
            L_BURST, self.bu_c, self.bu_t, self.buC, self.buT)
        # tables of the background node are draws from the uniform base
        total += -float(self.bg_tot[1]) * np.log(self.n_vocab)
        if self.network_initialized:
            total += self.log_network()
        return total

    def log_network(self):
        theta = self.docprior_probs()
        lt = self.lam_topic
        s_out = self.lam_out @ theta
        s_in = self.lam_in @ theta
        exponent = float(np.sum(lt * s_out * s_in))
        edge_k = self.h.sum(axis=0) / 2.0
        return float(
            np.sum(self.g_out * np.log(self.lam_out))
            + np.sum(self.g_in * np.log(self.lam_in))
            + np.sum(edge_k * np.log(lt))
            - exponent
        )

    # -- consistency ---------------------------------------------------

    def consistency_check(self):
        """All count invariants; returns a list of violation strings."""
        bad = []

        def level_ok(name, c, t, C, T, gem=False):
            c = np.asarray(c)
            t = np.asarray(t)
            if np.any(c < 0) or np.any(t < 0):
                bad.append(f"{name}: negative counts")
            if np.any(t > c):
                bad.append(f"{name}: t > c")
            if np.any((c >= 1) & (t < 1)):
                bad.append(f"{name}: customers without a table")
            if gem and np.any(t > 1):
                bad.append(f"{name}: root table count > 1")
            csum = c.sum(axis=-1)
            tsum = t.sum(axis=-1)
            if not np.array_equal(np.asarray(C), csum):
                bad.append(f"{name}: stored C != sum(c)")
            if not np.array_equal(np.asarray(T), tsum):
                bad.append(f"{name}: stored T != sum(t)")

        level_ok("root", self.root_c, self.root_t,
                 self.root_tot[0], self.root_tot[1], gem=True)
        level_ok("author", self.au_c, self.au_t,
                 self.au_tot[:, 0], self.au_tot[:, 1])
        if self.config.has_doc_prior:
            level_ok("doc_prior", self.dp_c, self.dp_t,
                     self.dp_tot[:, 0], self.dp_tot[:, 1])
        level_ok("doc", self.doc_c, self.doc_t,
                 self.doc_tot[:, 0], self.doc_tot[:, 1])
        level_ok("background", self.bg_c, self.bg_t,
                 self.bg_tot[0], self.bg_tot[1])
        level_ok("topic_word", self.tw_c, self.tw_t,
                 self.tw_tot[:, 0], self.tw_tot[:, 1])
        level_ok("burst", self.bu_c, self.bu_t, self.buC, self.buT)

        # cross-level: each node's customers are its children's tables
        if not np.array_equal(self.root_c, self.au_t.sum(axis=0)):
            bad.append("root customers != author tables")
        doc_up = self.dp_t if self.config.has_doc_prior else self.doc_t
        au_from_docs = np.zeros_like(self.au_c)
        np.add.at(au_from_docs, self.doc_author, doc_up)
        if not np.array_equal(self.au_c, au_from_docs):
            bad.append("author customers != document tables")
        if self.config.has_doc_prior:
            if not np.array_equal(self.dp_c, self.doc_t + self.h):
                bad.append("doc_prior customers != doc tables + network counts")
        zc = np.zeros_like(self.doc_c)
        np.add.at(zc, (self.tok_doc, self.z), 1)
        if not np.array_equal(self.doc_c, zc):
            bad.append("doc customers != token assignments")
        if not np.array_equal(self.bg_c, self.tw_t.sum(axis=0)):
            bad.append("background customers != topic-word tables")
        tw_from_bu = np.zeros_like(self.tw_c)
        np.add.at(tw_from_bu.T, self.uw_word, self.bu_t)
        if not np.array_equal(self.tw_c, tw_from_bu):
            bad.append("topic-word customers != burst tables")
        bu_from_z = np.zeros_like(self.bu_c)
        np.add.at(bu_from_z, (self.tok_urow, self.z), 1)
        if not np.array_equal(self.bu_c, bu_from_z):
            bad.append("burst customers != token assignments")
        bu_doc = self.uw_doc
        buC = np.zeros_like(self.buC)
        buT = np.zeros_like(self.buT)
        np.add.at(buC, bu_doc, self.bu_c)
        np.add.at(buT, bu_doc, self.bu_t)
        if not np.array_equal(self.buC, buC) or not np.array_equal(self.buT, buT):
            bad.append("burst totals mismatch")

        if self.network_initialized:
            if int(self.h.sum()) != 2 * self.n_edges:
                bad.append("network counts != 2 * edges")
            per_doc = self.h.sum(axis=1)
            if not np.array_equal(per_doc, self.g_out + self.g_in):
                bad.append("network counts != degree sums")
        elif np.any(self.h != 0):
            bad.append("network counts present before activation")
        return bad


def init_random(corpus, graph, config, max_grow=1000):
    """Build a state over the training documents and seat every token at
    a uniform-random topic slot via the seating chains."""
    state = ModelState(config)
    docs = corpus.train_documents()
    if not docs:
        raise ValueError("corpus has no training documents")
    doc_index = [i for i, d in enumerate(corpus.documents) if d.split == "train"]
    D = len(docs)
    K = config.topic_cap
    V = len(corpus.vocabulary)
    if config.variant == "hdp_lda_bursty":
        A = 1
        authors = np.zeros(D, dtype=np.int32)
    else:
        A = max(len(corpus.authors), 1)
        authors = np.array(
            [0 if d.first_author is None else d.first_author for d in docs],
            dtype=np.int32)

    tok_doc = []
    tok_word = []
    tok_urow = []
    tok_title = []
    uw_word = []
    uw_doc = []
    uw_off = [0]
    for di, doc in enumerate(docs):
        seen = {}
        for pos, w in enumerate(doc.tokens):
            row = seen.get(w)
            if row is None:
                row = len(uw_word)
                seen[w] = row
                uw_word.append(w)
                uw_doc.append(di)
            tok_doc.append(di)
            tok_word.append(w)
            tok_urow.append(row)
            tok_title.append(pos < doc.n_title)
        uw_off.append(len(uw_word))
    U = len(uw_word)
    N = len(tok_word)

    state.doc_index = np.array(doc_index, dtype=np.int32)
    state.doc_author = authors
    state.n_vocab = V
    state.n_authors = A
    state.n_docs = D
    state.tok_doc = np.array(tok_doc, dtype=np.int32)
    state.tok_word = np.array(tok_word, dtype=np.int32)
    state.tok_urow = np.array(tok_urow, dtype=np.int32)
    state.tok_title = np.array(tok_title, dtype=bool)
    state.uw_word = np.array(uw_word, dtype=np.int32)
    state.uw_doc = np.array(uw_doc, dtype=np.int32)
    state.uw_off = np.array(uw_off, dtype=np.int64)
    state.z = np.full(N, -1, dtype=np.int32)

    state.root_c = np.zeros(K, dtype=np.int64)
    state.root_t = np.zeros(K, dtype=np.int64)
    state.root_tot = np.zeros(2, dtype=np.int64)
    state.au_c = np.zeros((A, K), dtype=np.int64)
    state.au_t = np.zeros((A, K), dtype=np.int64)
    state.au_tot = np.zeros((A, 2), dtype=np.int64)
    state.dp_c = np.zeros((D, K), dtype=np.int64)
    state.dp_t = np.zeros((D, K), dtype=np.int64)
    state.dp_tot = np.zeros((D, 2), dtype=np.int64)
    state.doc_c = np.zeros((D, K), dtype=np.int64)
    state.doc_t = np.zeros((D, K), dtype=np.int64)
    state.doc_tot = np.zeros((D, 2), dtype=np.int64)
    state.bg_c = np.zeros(V, dtype=np.int64)
    state.bg_t = np.zeros(V, dtype=np.int64)
    state.bg_tot = np.zeros(2, dtype=np.int64)
    state.tw_c = np.zeros((K, V), dtype=np.int64)
    state.tw_t = np.zeros((K, V), dtype=np.int64)
    state.tw_tot = np.zeros((K, 2), dtype=np.int64)
    state.bu_c = np.zeros((U, K), dtype=np.int64)
    state.bu_t = np.zeros((U, K), dtype=np.int64)
    state.buC = np.zeros((D, K), dtype=np.int64)
    state.buT = np.zeros((D, K), dtype=np.int64)

    sub = graph.subgraph(doc_index)
    state.edge_src = sub.src.astype(np.int32)
    state.edge_dst = sub.dst.astype(np.int32)
    state.n_edges = sub.n_edges
    state.g_out = sub.out_degree
    state.g_in = sub.in_degree
    state.y = np.full(sub.n_edges, -1, dtype=np.int32)
    state.h = np.zeros((D, K), dtype=np.int64)
    state.lam_out = np.ones(D)
    state.lam_in = np.ones(D)
    state.lam_topic = np.ones(K)

    state.disc = config.discounts()
    state.conc = np.full(N_LEVELS, config.beta0)
    state.caches = [stirling.get_cache(d) for d in state.disc]
    state.rng_state = kernels.seed_state(config.seed)
    state.rng = np.random.default_rng(config.seed)
    state.need = np.zeros(3, dtype=np.int64)
    state.wbuf = np.zeros(K, dtype=np.float64)

    start = 0
    with np.errstate(over="ignore"):
        for _ in range(max_grow):
            res = kernels.init_assign(
                start, state.z, state.tok_doc, state.tok_urow, state.tok_word,
                state.doc_author, state.has_dp, 1.0 / V,
                state.root_c, state.root_t, state.root_tot,
                state.au_c, state.au_t, state.au_tot,
                state.dp_c, state.dp_t, state.dp_tot,
                state.doc_c, state.doc_t, state.doc_tot,
                state.bg_c, state.bg_t, state.bg_tot,
                state.tw_c, state.tw_t, state.tw_tot,
                state.bu_c, state.bu_t, state.buC, state.buT,
                state.disc, state.conc, *state.tables(),
                state.rng_state, state.need)
            if res < 0:
                break
            state.grow(state.need)
            start = res
        else:
            raise RuntimeError("Stirling table growth did not converge")
    return state


# ----------------------------------------------------------------------
# Checkpointing

_ARRAY_FIELDS = [
    "doc_index", "doc_author", "tok_doc", "tok_word", "tok_urow",
    "tok_title", "uw_word", "uw_doc", "uw_off", "z",
    "root_c", "root_t", "root_tot", "au_c", "au_t", "au_tot",
    "dp_c", "dp_t", "dp_tot", "doc_c", "doc_t", "doc_tot",
    "bg_c", "bg_t", "bg_tot", "tw_c", "tw_t", "tw_tot",
    "bu_c", "bu_t", "buC", "buT",
    "edge_src", "edge_dst", "g_out", "g_in", "y", "h",
    "lam_out", "lam_in", "lam_topic", "disc", "conc", "rng_state",
]


def save_checkpoint(state, path):
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(state.config),
        "iteration": state.iteration,
        "network_initialized": state.network_initialized,
        "fingerprint": state.fingerprint,
        "n_vocab": state.n_vocab,
        "n_authors": state.n_authors,
        "n_docs": state.n_docs,
        "n_edges": state.n_edges,
        "np_rng": state.rng.bit_generator.state,
    }
    arrays = {name: getattr(state, name) for name in _ARRAY_FIELDS}
    np.savez_compressed(path, meta=np.frombuffer(
        json.dumps(meta).encode(), dtype=np.uint8), **arrays)


def load_checkpoint(path):
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(
                f"unsupported checkpoint version {meta.get('version')!r}"
            )
        config = ModelConfig(**meta["config"])
        state = ModelState(config)
        for name in _ARRAY_FIELDS:
            setattr(state, name, data[name].copy())
    state.iteration = meta["iteration"]
    state.network_initialized = meta["network_initialized"]
    state.fingerprint = meta["fingerprint"]
    state.n_vocab = meta["n_vocab"]
    state.n_authors = meta["n_authors"]
    state.n_docs = meta["n_docs"]
    state.n_edges = meta["n_edges"]
    state.tok_title = state.tok_title.astype(bool)
    state.caches = [stirling.get_cache(d) for d in state.disc]
    state.rng = np.random.default_rng()
    state.rng.bit_generator.state = meta["np_rng"]
    state.need = np.zeros(3, dtype=np.int64)
    state.wbuf = np.zeros(config.topic_cap, dtype=np.float64)
    return state
