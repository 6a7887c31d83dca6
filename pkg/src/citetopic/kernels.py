"""Hot sampling kernels over the dense array state.

Everything here operates on plain numpy arrays so the same source runs
either compiled with numba (default) or as pure Python when the
environment variable CITETOPIC_NUMBA=0 is set.  The seven hierarchy
levels are laid out as flat count arrays; per-level log Stirling tables
are passed in as 2-D arrays and, because they grow on demand, kernels
check capacity before touching a token/edge and bail out with a resume
index so the caller can enlarge the table and re-enter.

Level order (indices into the disc/conc parameter vectors):
  0 root        GEM over topic labels
  1 author      per-author topic preference, parent root
  2 doc_prior   per-document prior, parent author; also holds network counts
  3 doc         per-document topic vector, parent doc_prior (or author)
  4 background  corpus-wide word distribution, parent uniform 1/V
  5 topic_word  per-topic word distribution, parent background
  6 burst       per-(document, topic) word distribution, parent topic_word
"""

import math
import os

import numpy as np

USE_NUMBA = os.environ.get("CITETOPIC_NUMBA", "1").lower() not in ("0", "false", "no")

if USE_NUMBA:
    from numba import njit as _njit

    def jit(fn):
        return _njit(cache=True)(fn)
else:
    def jit(fn):
        return fn

L_ROOT = 0
L_AUTHOR = 1
L_DOCPRIOR = 2
L_DOC = 3
L_BACKGROUND = 4
L_TOPICWORD = 5
L_BURST = 6
N_LEVELS = 7

_DOUBLE_SCALE = 1.1102230246251565e-16  # 2**-53


# ----------------------------------------------------------------------
# Counter-free xoshiro256++ generator with explicit uint64[4] state, so
# the stream can be checkpointed and replayed identically on both
# backends.

def seed_state(seed):
    """Derive a fresh uint64[4] generator state from an integer seed."""
    mask = (1 << 64) - 1
    x = (int(seed) ^ 0x9E3779B97F4A7C15) & mask
    out = np.empty(4, dtype=np.uint64)
    for i in range(4):
        x = (x + 0x9E3779B97F4A7C15) & mask
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out[i] = z ^ (z >> 31)
    if not out.any():
        out[0] = 1
    return out


@jit
def rng_next(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    x = s0 + s3
    r = ((x << np.uint64(23)) | (x >> np.uint64(41))) + s0
    t = s1 << np.uint64(17)
    s2 = s2 ^ s0
    s3 = s3 ^ s1
    s1 = s1 ^ s2
    s0 = s0 ^ s3
    s2 = s2 ^ t
    s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return r


@jit
def rng_double(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(rng_next(state) >> np.uint64(11)) * _DOUBLE_SCALE


# ----------------------------------------------------------------------
# Per-node seating weights.  A node contributes a "join an existing
# table" weight and an "open a new table" weight; the open weight is
# multiplied by the parent's own total weight by the caller.

@jit
def _node_w(tab, c, t, C, T, disc, conc):
    denom = conc + C
    if c > 0:
        join = math.exp(tab[c + 1, t] - tab[c, t]) / denom
        opn = (conc + disc * T) * math.exp(tab[c + 1, t + 1] - tab[c, t]) / denom
    else:
        join = 0.0
        opn = (conc + disc * T) / denom
    return join, opn


@jit
def _root_w(tab, c, C, T, disc, conc):
    """Root (GEM) weight: one table per label, fresh labels carry the
    new-label mass with base weight 1."""
    denom = conc + C
    if c > 0:
        return math.exp(tab[c + 1, 1] - tab[c, 1]) / denom
    return (conc + disc * T) / denom


# ----------------------------------------------------------------------
# Capacity guards.  Index (c + 1, t + 1) must be addressable for every
# count the current step could read; `margin` covers multi-customer
# steps (network edges seat up to two customers per endpoint chain).

@jit
def _cap_ok(tab, cmax, tmax, margin, level, need):
    if cmax + margin < tab.shape[0] and tmax + margin < tab.shape[1]:
        return True
    need[0] = level
    need[1] = cmax + margin + 1
    need[2] = tmax + margin + 1
    return False


@jit
def _check_topic_side(d, a, has_dp, margin,
                      root_c, au_c, au_t, dp_c, dp_t, doc_c, doc_t,
                      tab_root, tab_au, tab_dp, tab_doc, need, check_doc):
    K = root_c.shape[0]
    cm = 0
    for k in range(K):
        if root_c[k] > cm:
            cm = root_c[k]
    if not _cap_ok(tab_root, cm, 1, margin, L_ROOT, need):
        return False
    cm = 0
    tm = 0
    for k in range(K):
        if au_c[a, k] > cm:
            cm = au_c[a, k]
        if au_t[a, k] > tm:
            tm = au_t[a, k]
    if not _cap_ok(tab_au, cm, tm, margin, L_AUTHOR, need):
        return False
    if has_dp != 0:
        cm = 0
        tm = 0
        for k in range(K):
            if dp_c[d, k] > cm:
                cm = dp_c[d, k]
            if dp_t[d, k] > tm:
                tm = dp_t[d, k]
        if not _cap_ok(tab_dp, cm, tm, margin, L_DOCPRIOR, need):
            return False
    if check_doc != 0:
        cm = 0
        tm = 0
        for k in range(K):
            if doc_c[d, k] > cm:
                cm = doc_c[d, k]
            if doc_t[d, k] > tm:
                tm = doc_t[d, k]
        if not _cap_ok(tab_doc, cm, tm, margin, L_DOC, need):
            return False
    return True


@jit
def _check_word_side(u, w, bg_c, bg_t, tw_c, tw_t, bu_c, bu_t,
                     tab_bg, tab_tw, tab_bu, need):
    K = tw_c.shape[0]
    if not _cap_ok(tab_bg, bg_c[w], bg_t[w], 1, L_BACKGROUND, need):
        return False
    cm = 0
    tm = 0
    for k in range(K):
        if tw_c[k, w] > cm:
            cm = tw_c[k, w]
        if tw_t[k, w] > tm:
            tm = tw_t[k, w]
    if not _cap_ok(tab_tw, cm, tm, 1, L_TOPICWORD, need):
        return False
    cm = 0
    tm = 0
    for k in range(K):
        if bu_c[u, k] > cm:
            cm = bu_c[u, k]
        if bu_t[u, k] > tm:
            tm = bu_t[u, k]
    return _cap_ok(tab_bu, cm, tm, 1, L_BURST, need)


# ----------------------------------------------------------------------
# Blocked add weights down each chain.

@jit
def _topic_w(d, a, k, has_dp,
             root_c, root_tot, au_c, au_t, au_tot,
             dp_c, dp_t, dp_tot, doc_c, doc_t, doc_tot,
             disc, conc, tab_root, tab_au, tab_dp, tab_doc):
    w = _root_w(tab_root, root_c[k], root_tot[0], root_tot[1],
                disc[L_ROOT], conc[L_ROOT])
    ja, oa = _node_w(tab_au, au_c[a, k], au_t[a, k], au_tot[a, 0], au_tot[a, 1],
                     disc[L_AUTHOR], conc[L_AUTHOR])
    w = ja + oa * w
    if has_dp != 0:
        jp, op = _node_w(tab_dp, dp_c[d, k], dp_t[d, k], dp_tot[d, 0],
                         dp_tot[d, 1], disc[L_DOCPRIOR], conc[L_DOCPRIOR])
        w = jp + op * w
    jd, od = _node_w(tab_doc, doc_c[d, k], doc_t[d, k], doc_tot[d, 0],
                     doc_tot[d, 1], disc[L_DOC], conc[L_DOC])
    return jd + od * w


@jit
def _word_w(u, d, k, w, inv_vocab,
            bg_c, bg_t, bg_tot, tw_c, tw_t, tw_tot,
            bu_c, bu_t, buC, buT,
            disc, conc, tab_bg, tab_tw, tab_bu):
    jg, og = _node_w(tab_bg, bg_c[w], bg_t[w], bg_tot[0], bg_tot[1],
                     disc[L_BACKGROUND], conc[L_BACKGROUND])
    wv = jg + og * inv_vocab
    jt, ot = _node_w(tab_tw, tw_c[k, w], tw_t[k, w], tw_tot[k, 0], tw_tot[k, 1],
                     disc[L_TOPICWORD], conc[L_TOPICWORD])
    wv = jt + ot * wv
    jb, ob = _node_w(tab_bu, bu_c[u, k], bu_t[u, k], buC[d, k], buT[d, k],
                     disc[L_BURST], conc[L_BURST])
    return jb + ob * wv


# ----------------------------------------------------------------------
# Seating (increment) chains: each level samples its open-table
# indicator against the parent weight, mutating counts on the way up.

@jit
def _add_au_up(a, k, rng_state, root_c, root_t, root_tot,
               au_c, au_t, au_tot, disc, conc, tab_root, tab_au):
    wr = _root_w(tab_root, root_c[k], root_tot[0], root_tot[1],
                 disc[L_ROOT], conc[L_ROOT])
    ja, oa = _node_w(tab_au, au_c[a, k], au_t[a, k], au_tot[a, 0], au_tot[a, 1],
                     disc[L_AUTHOR], conc[L_AUTHOR])
    up = oa * wr
    opened = rng_double(rng_state) * (ja + up) < up
    au_c[a, k] += 1
    au_tot[a, 0] += 1
    if opened:
        au_t[a, k] += 1
        au_tot[a, 1] += 1
        root_c[k] += 1
        root_tot[0] += 1
        if root_c[k] == 1:
            root_t[k] = 1
            root_tot[1] += 1


@jit
def _add_dp_up(d, a, k, rng_state, root_c, root_t, root_tot,
               au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
               disc, conc, tab_root, tab_au, tab_dp):
    wr = _root_w(tab_root, root_c[k], root_tot[0], root_tot[1],
                 disc[L_ROOT], conc[L_ROOT])
    ja, oa = _node_w(tab_au, au_c[a, k], au_t[a, k], au_tot[a, 0], au_tot[a, 1],
                     disc[L_AUTHOR], conc[L_AUTHOR])
    w_au = ja + oa * wr
    jp, op = _node_w(tab_dp, dp_c[d, k], dp_t[d, k], dp_tot[d, 0], dp_tot[d, 1],
                     disc[L_DOCPRIOR], conc[L_DOCPRIOR])
    up = op * w_au
    opened = rng_double(rng_state) * (jp + up) < up
    dp_c[d, k] += 1
    dp_tot[d, 0] += 1
    if opened:
        dp_t[d, k] += 1
        dp_tot[d, 1] += 1
        _add_au_up(a, k, rng_state, root_c, root_t, root_tot,
                   au_c, au_t, au_tot, disc, conc, tab_root, tab_au)


@jit
def _add_topic(d, a, k, has_dp, rng_state, root_c, root_t, root_tot,
               au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
               doc_c, doc_t, doc_tot,
               disc, conc, tab_root, tab_au, tab_dp, tab_doc):
    wr = _root_w(tab_root, root_c[k], root_tot[0], root_tot[1],
                 disc[L_ROOT], conc[L_ROOT])
    ja, oa = _node_w(tab_au, au_c[a, k], au_t[a, k], au_tot[a, 0], au_tot[a, 1],
                     disc[L_AUTHOR], conc[L_AUTHOR])
    w_up = ja + oa * wr
    if has_dp != 0:
        jp, op = _node_w(tab_dp, dp_c[d, k], dp_t[d, k], dp_tot[d, 0],
                         dp_tot[d, 1], disc[L_DOCPRIOR], conc[L_DOCPRIOR])
        w_up = jp + op * w_up
    jd, od = _node_w(tab_doc, doc_c[d, k], doc_t[d, k], doc_tot[d, 0],
                     doc_tot[d, 1], disc[L_DOC], conc[L_DOC])
    up = od * w_up
    opened = rng_double(rng_state) * (jd + up) < up
    doc_c[d, k] += 1
    doc_tot[d, 0] += 1
    if opened:
        doc_t[d, k] += 1
        doc_tot[d, 1] += 1
        if has_dp != 0:
            _add_dp_up(d, a, k, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                       disc, conc, tab_root, tab_au, tab_dp)
        else:
            _add_au_up(a, k, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, disc, conc, tab_root, tab_au)


@jit
def _add_word(u, d, k, w, inv_vocab, rng_state,
              bg_c, bg_t, bg_tot, tw_c, tw_t, tw_tot,
              bu_c, bu_t, buC, buT,
              disc, conc, tab_bg, tab_tw, tab_bu):
    jg, og = _node_w(tab_bg, bg_c[w], bg_t[w], bg_tot[0], bg_tot[1],
                     disc[L_BACKGROUND], conc[L_BACKGROUND])
    w_bg = jg + og * inv_vocab
    jt, ot = _node_w(tab_tw, tw_c[k, w], tw_t[k, w], tw_tot[k, 0], tw_tot[k, 1],
                     disc[L_TOPICWORD], conc[L_TOPICWORD])
    w_tw = jt + ot * w_bg
    jb, ob = _node_w(tab_bu, bu_c[u, k], bu_t[u, k], buC[d, k], buT[d, k],
                     disc[L_BURST], conc[L_BURST])
    up = ob * w_tw
    opened = rng_double(rng_state) * (jb + up) < up
    bu_c[u, k] += 1
    buC[d, k] += 1
    if not opened:
        return
    bu_t[u, k] += 1
    buT[d, k] += 1
    up = ot * w_bg
    opened = rng_double(rng_state) * (jt + up) < up
    tw_c[k, w] += 1
    tw_tot[k, 0] += 1
    if not opened:
        return
    tw_t[k, w] += 1
    tw_tot[k, 1] += 1
    up = og * inv_vocab
    opened = rng_double(rng_state) * (jg + up) < up
    bg_c[w] += 1
    bg_tot[0] += 1
    if opened:
        bg_t[w] += 1
        bg_tot[1] += 1


# ----------------------------------------------------------------------
# Unseating (decrement) chains.  A table is removed with the exact
# posterior probability that the departing customer was the one who
# opened it, S(c-1, t-1) / S(c, t); this keeps t >= 1 whenever c >= 1
# and makes add/remove pairs distribution-preserving.

@jit
def _rem_au_up(a, k, rng_state, root_c, root_t, root_tot,
               au_c, au_t, au_tot, tab_au):
    c = au_c[a, k]
    t = au_t[a, k]
    drop = rng_double(rng_state) < math.exp(tab_au[c - 1, t - 1] - tab_au[c, t])
    au_c[a, k] = c - 1
    au_tot[a, 0] -= 1
    if drop:
        au_t[a, k] = t - 1
        au_tot[a, 1] -= 1
        root_c[k] -= 1
        root_tot[0] -= 1
        if root_c[k] == 0:
            root_t[k] = 0
            root_tot[1] -= 1


@jit
def _rem_dp_up(d, a, k, rng_state, root_c, root_t, root_tot,
               au_c, au_t, au_tot, dp_c, dp_t, dp_tot, tab_au, tab_dp):
    c = dp_c[d, k]
    t = dp_t[d, k]
    drop = rng_double(rng_state) < math.exp(tab_dp[c - 1, t - 1] - tab_dp[c, t])
    dp_c[d, k] = c - 1
    dp_tot[d, 0] -= 1
    if drop:
        dp_t[d, k] = t - 1
        dp_tot[d, 1] -= 1
        _rem_au_up(a, k, rng_state, root_c, root_t, root_tot,
                   au_c, au_t, au_tot, tab_au)


@jit
def _rem_topic(d, a, k, has_dp, rng_state, root_c, root_t, root_tot,
               au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
               doc_c, doc_t, doc_tot, tab_au, tab_dp, tab_doc):
    c = doc_c[d, k]
    t = doc_t[d, k]
    drop = rng_double(rng_state) < math.exp(tab_doc[c - 1, t - 1] - tab_doc[c, t])
    doc_c[d, k] = c - 1
    doc_tot[d, 0] -= 1
    if drop:
        doc_t[d, k] = t - 1
        doc_tot[d, 1] -= 1
        if has_dp != 0:
            _rem_dp_up(d, a, k, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, dp_c, dp_t, dp_tot, tab_au, tab_dp)
        else:
            _rem_au_up(a, k, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, tab_au)


@jit
def _rem_word(u, d, k, w, rng_state,
              bg_c, bg_t, bg_tot, tw_c, tw_t, tw_tot,
              bu_c, bu_t, buC, buT, tab_bg, tab_tw, tab_bu):
    c = bu_c[u, k]
    t = bu_t[u, k]
    drop = rng_double(rng_state) < math.exp(tab_bu[c - 1, t - 1] - tab_bu[c, t])
    bu_c[u, k] = c - 1
    buC[d, k] -= 1
    if not drop:
        return
    bu_t[u, k] = t - 1
    buT[d, k] -= 1
    c = tw_c[k, w]
    t = tw_t[k, w]
    drop = rng_double(rng_state) < math.exp(tab_tw[c - 1, t - 1] - tab_tw[c, t])
    tw_c[k, w] = c - 1
    tw_tot[k, 0] -= 1
    if not drop:
        return
    tw_t[k, w] = t - 1
    tw_tot[k, 1] -= 1
    c = bg_c[w]
    t = bg_t[w]
    drop = rng_double(rng_state) < math.exp(tab_bg[c - 1, t - 1] - tab_bg[c, t])
    bg_c[w] = c - 1
    bg_tot[0] -= 1
    if drop:
        bg_t[w] = t - 1
        bg_tot[1] -= 1


# ----------------------------------------------------------------------
# Word-topic sweeps.

@jit
def sweep_words(start, z, tok_doc, tok_urow, tok_word, doc_author,
                has_dp, inv_vocab,
                root_c, root_t, root_tot, au_c, au_t, au_tot,
                dp_c, dp_t, dp_tot, doc_c, doc_t, doc_tot,
                bg_c, bg_t, bg_tot, tw_c, tw_t, tw_tot,
                bu_c, bu_t, buC, buT,
                disc, conc,
                tab_root, tab_au, tab_dp, tab_doc, tab_bg, tab_tw, tab_bu,
                rng_state, need, wbuf):
    """One blocked Gibbs pass over tokens [start, N).

    Returns -1 when the pass completed, otherwise the index of the
    token that could not be processed because a Stirling table is too
    small; `need` then holds (level, n, m) to grow to.
    """
    K = root_c.shape[0]
    n_tok = z.shape[0]
    for n in range(start, n_tok):
        d = tok_doc[n]
        a = doc_author[d]
        u = tok_urow[n]
        w = tok_word[n]
        if not _check_topic_side(d, a, has_dp, 1, root_c, au_c, au_t,
                                 dp_c, dp_t, doc_c, doc_t,
                                 tab_root, tab_au, tab_dp, tab_doc, need, 1):
            return n
        if not _check_word_side(u, w, bg_c, bg_t, tw_c, tw_t, bu_c, bu_t,
                                tab_bg, tab_tw, tab_bu, need):
            return n
        k0 = z[n]
        _rem_topic(d, a, k0, has_dp, rng_state, root_c, root_t, root_tot,
                   au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                   doc_c, doc_t, doc_tot, tab_au, tab_dp, tab_doc)
        _rem_word(u, d, k0, w, rng_state, bg_c, bg_t, bg_tot,
                  tw_c, tw_t, tw_tot, bu_c, bu_t, buC, buT,
                  tab_bg, tab_tw, tab_bu)
        first_empty = -1
        total = 0.0
        for k in range(K):
            if root_c[k] == 0:
                if first_empty >= 0:
                    wbuf[k] = 0.0
                    continue
                first_empty = k
            wk = _topic_w(d, a, k, has_dp, root_c, root_tot,
                          au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                          doc_c, doc_t, doc_tot, disc, conc,
                          tab_root, tab_au, tab_dp, tab_doc)
            wk *= _word_w(u, d, k, w, inv_vocab, bg_c, bg_t, bg_tot,
                          tw_c, tw_t, tw_tot, bu_c, bu_t, buC, buT,
                          disc, conc, tab_bg, tab_tw, tab_bu)
            wbuf[k] = wk
            total += wk
        r = rng_double(rng_state) * total
        k1 = -1
        acc = 0.0
        for k in range(K):
            if wbuf[k] > 0.0:
                acc += wbuf[k]
                k1 = k
                if r < acc:
                    break
        z[n] = k1
        _add_topic(d, a, k1, has_dp, rng_state, root_c, root_t, root_tot,
                   au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                   doc_c, doc_t, doc_tot, disc, conc,
                   tab_root, tab_au, tab_dp, tab_doc)
        _add_word(u, d, k1, w, inv_vocab, rng_state, bg_c, bg_t, bg_tot,
                  tw_c, tw_t, tw_tot, bu_c, bu_t, buC, buT,
                  disc, conc, tab_bg, tab_tw, tab_bu)
    return -1


@jit
def init_assign(start, z, tok_doc, tok_urow, tok_word, doc_author,
                has_dp, inv_vocab,
                root_c, root_t, root_tot, au_c, au_t, au_tot,
                dp_c, dp_t, dp_tot, doc_c, doc_t, doc_tot,
                bg_c, bg_t, bg_tot, tw_c, tw_t, tw_tot,
                bu_c, bu_t, buC, buT,
                disc, conc,
                tab_root, tab_au, tab_dp, tab_doc, tab_bg, tab_tw, tab_bu,
                rng_state, need):
    """Assign uniform-random topics to tokens [start, N) and seat them."""
    K = root_c.shape[0]
    n_tok = z.shape[0]
    for n in range(start, n_tok):
        d = tok_doc[n]
        a = doc_author[d]
        u = tok_urow[n]
        w = tok_word[n]
        if not _check_topic_side(d, a, has_dp, 1, root_c, au_c, au_t,
                                 dp_c, dp_t, doc_c, doc_t,
                                 tab_root, tab_au, tab_dp, tab_doc, need, 1):
            return n
        if not _check_word_side(u, w, bg_c, bg_t, tw_c, tw_t, bu_c, bu_t,
                                tab_bg, tab_tw, tab_bu, need):
            return n
        k = int(rng_double(rng_state) * K)
        if k >= K:
            k = K - 1
        z[n] = k
        _add_topic(d, a, k, has_dp, rng_state, root_c, root_t, root_tot,
                   au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                   doc_c, doc_t, doc_tot, disc, conc,
                   tab_root, tab_au, tab_dp, tab_doc)
        _add_word(u, d, k, w, inv_vocab, rng_state, bg_c, bg_t, bg_tot,
                  tw_c, tw_t, tw_tot, bu_c, bu_t, buC, buT,
                  disc, conc, tab_bg, tab_tw, tab_bu)
    return -1


# ----------------------------------------------------------------------
# Citation-network pass.

@jit
def _pair_w(i, j, ai, aj, k, root_c, root_t, root_tot,
            au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
            disc, conc, tab_root, tab_au, tab_dp):
    """Blocked weight of seating the two endpoint customers of one edge
    at topic k (doc-prior nodes of i and j; both at i for a self edge).

    The first customer's indicator chain is enumerated by its stopping
    level so the second customer's weight is evaluated in the exactly
    incremented state; the two chains can interact through a shared
    author node and always through the root.
    """
    wr = _root_w(tab_root, root_c[k], root_tot[0], root_tot[1],
                 disc[L_ROOT], conc[L_ROOT])
    ja, oa = _node_w(tab_au, au_c[ai, k], au_t[ai, k], au_tot[ai, 0],
                     au_tot[ai, 1], disc[L_AUTHOR], conc[L_AUTHOR])
    jp, op = _node_w(tab_dp, dp_c[i, k], dp_t[i, k], dp_tot[i, 0],
                     dp_tot[i, 1], disc[L_DOCPRIOR], conc[L_DOCPRIOR])
    total = 0.0
    for b in range(3):
        if b == 0:
            wb = jp                  # stop at doc-prior of i
        elif b == 1:
            wb = op * ja             # open at doc-prior, stop at author
        else:
            wb = op * oa * wr        # tables all the way to the root
        if wb <= 0.0:
            continue
        dpc = 0
        dpt = 0
        auc = 0
        aut = 0
        rc = 0
        rT = 0
        if i == j:
            dpc = 1
            if b >= 1:
                dpt = 1
        if b >= 1 and aj == ai:
            auc = 1
            if b == 2:
                aut = 1
        if b == 2:
            rc = 1
            if root_c[k] == 0:
                rT = 1
        wr2 = _root_w(tab_root, root_c[k] + rc, root_tot[0] + rc,
                      root_tot[1] + rT, disc[L_ROOT], conc[L_ROOT])
        ja2, oa2 = _node_w(tab_au, au_c[aj, k] + auc, au_t[aj, k] + aut,
                           au_tot[aj, 0] + auc, au_tot[aj, 1] + aut,
                           disc[L_AUTHOR], conc[L_AUTHOR])
        jp2, op2 = _node_w(tab_dp, dp_c[j, k] + dpc, dp_t[j, k] + dpt,
                           dp_tot[j, 0] + dpc, dp_tot[j, 1] + dpt,
                           disc[L_DOCPRIOR], conc[L_DOCPRIOR])
        total += wb * (jp2 + op2 * (ja2 + oa2 * wr2))
    return total


@jit
def sweep_network(start, init_mode, src, dst, y, h, doc_author,
                  lam_topic, theta_dp, active,
                  root_c, root_t, root_tot, au_c, au_t, au_tot,
                  dp_c, dp_t, dp_tot,
                  disc, conc, tab_root, tab_au, tab_dp,
                  rng_state, need, qbuf, stats):
    """Metropolis-Hastings pass over citation edges [start, E).

    init_mode=1 seats every edge at a topic drawn from the proposal
    without any decrement or accept step (first activation).  stats
    accumulates (accepted, proposed, proposal-fallbacks).  Returns -1
    or a resume edge index with `need` filled, as in sweep_words.
    """
    K = root_c.shape[0]
    n_edge = src.shape[0]
    for e in range(start, n_edge):
        i = src[e]
        j = dst[e]
        ai = doc_author[i]
        aj = doc_author[j]
        if not _check_topic_side(i, ai, 1, 2, root_c, au_c, au_t,
                                 dp_c, dp_t, dp_c, dp_t,
                                 tab_root, tab_au, tab_dp, tab_dp, need, 0):
            return e
        if not _check_topic_side(j, aj, 1, 2, root_c, au_c, au_t,
                                 dp_c, dp_t, dp_c, dp_t,
                                 tab_root, tab_au, tab_dp, tab_dp, need, 0):
            return e
        k0 = -1
        if init_mode == 0:
            k0 = y[e]
            if i == j:
                _rem_dp_up(i, ai, k0, rng_state, root_c, root_t, root_tot,
                           au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                           tab_au, tab_dp)
                _rem_dp_up(i, ai, k0, rng_state, root_c, root_t, root_tot,
                           au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                           tab_au, tab_dp)
                h[i, k0] -= 2
            else:
                _rem_dp_up(i, ai, k0, rng_state, root_c, root_t, root_tot,
                           au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                           tab_au, tab_dp)
                _rem_dp_up(j, aj, k0, rng_state, root_c, root_t, root_tot,
                           au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                           tab_au, tab_dp)
                h[i, k0] -= 1
                h[j, k0] -= 1
        qtot = 0.0
        for k in range(K):
            if active[k] != 0:
                qk = lam_topic[k] * theta_dp[i, k] * theta_dp[j, k]
            else:
                qk = 0.0
            qbuf[k] = qk
            qtot += qk
        if qtot <= 0.0:
            stats[2] += 1
            for k in range(K):
                qbuf[k] = 1.0 if active[k] != 0 else 0.0
                qtot += qbuf[k]
        r = rng_double(rng_state) * qtot
        k1 = -1
        acc = 0.0
        for k in range(K):
            if qbuf[k] > 0.0:
                acc += qbuf[k]
                k1 = k
                if r < acc:
                    break
        if init_mode != 0:
            kf = k1
        else:
            stats[1] += 1
            if k1 == k0:
                stats[0] += 1
                kf = k1
            else:
                pw_new = _pair_w(i, j, ai, aj, k1, root_c, root_t, root_tot,
                                 au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                                 disc, conc, tab_root, tab_au, tab_dp)
                pw_old = _pair_w(i, j, ai, aj, k0, root_c, root_t, root_tot,
                                 au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                                 disc, conc, tab_root, tab_au, tab_dp)
                ratio = (pw_new * lam_topic[k1] * qbuf[k0]) / \
                        (pw_old * lam_topic[k0] * qbuf[k1])
                if rng_double(rng_state) < ratio:
                    stats[0] += 1
                    kf = k1
                else:
                    kf = k0
        y[e] = kf
        if i == j:
            _add_dp_up(i, ai, kf, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                       disc, conc, tab_root, tab_au, tab_dp)
            _add_dp_up(i, ai, kf, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                       disc, conc, tab_root, tab_au, tab_dp)
            h[i, kf] += 2
        else:
            _add_dp_up(i, ai, kf, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                       disc, conc, tab_root, tab_au, tab_dp)
            _add_dp_up(j, aj, kf, rng_state, root_c, root_t, root_tot,
                       au_c, au_t, au_tot, dp_c, dp_t, dp_tot,
                       disc, conc, tab_root, tab_au, tab_dp)
            h[i, kf] += 1
            h[j, kf] += 1
    return -1
