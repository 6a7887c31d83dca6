"""Corpus data model and ingestion.

Covers tokenization, vocabulary filtering, author-name standardization,
first-author extraction, author merging, citation-graph construction and
the train/test split.  Two input formats are supported: the LINQS
content/cites plain-text pair (boolean word attributes) and a generic
JSON-lines record format with title/abstract/authors/citations fields.
"""

import json
import re
from dataclasses import dataclass, field

import numpy as np

FALLBACK_AUTHOR = "_no_author_"
MERGED_AUTHOR = "_merged_"

# Compact English stopword list (MALLET-style); callers may supply their own.
DEFAULT_STOPWORDS = frozenset("""
a about above across after again against all almost alone along already also
although always am among an and another any anybody anyone anything are around
as at be because been before behind being below between both but by can cannot
could did do does doing done down during each either else enough etc even ever
every few for from further had has have having he her here hers herself him
himself his how however i if in into is it its itself just least less many may
me might more most much must my myself neither never no nobody none nor not
nothing now of off often on once one only or other our ours ourselves out over
own per rather same she should since so some such than that the their theirs
them themselves then there therefore these they this those through thus to
together too toward under until up upon us very was we well were what when
where whether which while who whom whose why will with within without would
yet you your yours yourself yourselves
""".split())

DEFAULT_HONORIFICS = frozenset(
    {"prof", "professor", "dr", "doctor", "mr", "mrs", "ms", "sir", "phd", "md"}
)

# Words that flag an "author" string as an institution rather than a person.
DEFAULT_EXCLUSION_WORDS = frozenset(
    {"society", "university", "universitat", "universität", "institute",
     "institut", "association", "academy", "department", "laboratory",
     "college", "school", "center", "centre", "foundation", "press"}
)

TOKEN_RE = re.compile(r"[a-z0-9]+")


class CorpusFormatError(ValueError):
    """Raised on malformed input records; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass
class Document:
    id: str
    tokens: list          # vocabulary indices, title tokens first
    n_title: int          # how many leading tokens come from the title
    first_author: int | None
    class_label: str | None = None
    split: str = "train"


@dataclass
class VocabularyFilterSpec:
    stopwords: frozenset = DEFAULT_STOPWORDS
    common_threshold: float = 0.18
    rare_count: int = 50

    def __post_init__(self):
        if not 0.0 < self.common_threshold <= 1.0:
            raise ValueError("common_threshold must be in (0, 1]")
        if self.rare_count < 0:
            raise ValueError("rare_count must be non-negative")


@dataclass
class Corpus:
    documents: list
    vocabulary: list                      # index -> token string
    authors: list                         # index -> standardized name
    class_names: list = field(default_factory=list)
    vocab_index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.vocab_index:
            self.vocab_index = {w: i for i, w in enumerate(self.vocabulary)}

    @property
    def n_documents(self):
        return len(self.documents)

    def train_documents(self):
        return [d for d in self.documents if d.split == "train"]

    def test_documents(self):
        return [d for d in self.documents if d.split == "test"]


class CitationGraph:
    """Sparse boolean citation matrix with the self-citation diagonal.

    Edges are ordered (citing, cited) pairs; every document carries the
    implicit self-citation (i, i).
    """

    def __init__(self, n_docs, edges):
        self.n_docs = int(n_docs)
        uniq = sorted(set(edges) | {(i, i) for i in range(self.n_docs)})
        self.src = np.array([e[0] for e in uniq], dtype=np.int32)
        self.dst = np.array([e[1] for e in uniq], dtype=np.int32)
        self.out_degree = np.bincount(self.src, minlength=self.n_docs).astype(np.int64)
        self.in_degree = np.bincount(self.dst, minlength=self.n_docs).astype(np.int64)

    @property
    def n_edges(self):
        return len(self.src)

    def edge_set(self):
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def subgraph(self, doc_ids):
        """Graph restricted to the given document indices, reindexed."""
        remap = {d: i for i, d in enumerate(doc_ids)}
        edges = [
            (remap[s], remap[t])
            for s, t in zip(self.src.tolist(), self.dst.tolist())
            if s in remap and t in remap
        ]
        return CitationGraph(len(doc_ids), edges)


def tokenize(text, phrases=None):
    """Lowercase unigram tokenization; optional caller-supplied phrases
    join adjacent tokens into single underscore-linked terms."""
    tokens = TOKEN_RE.findall(text.lower())
    if not phrases:
        return tokens
    phrase_map = {}
    max_len = 1
    for phrase in phrases:
        parts = tuple(TOKEN_RE.findall(phrase.lower()))
        if len(parts) > 1:
            phrase_map[parts] = "_".join(parts)
            max_len = max(max_len, len(parts))
    out = []
    i = 0
    while i < len(tokens):
        matched = False
        for width in range(min(max_len, len(tokens) - i), 1, -1):
            key = tuple(tokens[i:i + width])
            if key in phrase_map:
                out.append(phrase_map[key])
                i += width
                matched = True
                break
        if not matched:
            out.append(tokens[i])
            i += 1
    return out


def normalize_author_name(raw, exclusion_words=DEFAULT_EXCLUSION_WORDS,
                          honorifics=DEFAULT_HONORIFICS):
    """Standardize an author string to "<first-initial> <Lastname>".

    Honorific titles are stripped, the first name is reduced to its
    initial and middle names are dropped.  Returns None for empty
    strings and for strings matching an institutional exclusion word.
    """
    if raw is None:
        return None
    parts = re.findall(r"[A-Za-z][A-Za-z'\-]*", raw)
    if exclusion_words:
        lowered = {p.lower() for p in parts}
        if lowered & {w.lower() for w in exclusion_words}:
            return None
    parts = [p for p in parts if p.lower() not in honorifics]
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0].capitalize()
    first, last = parts[0], parts[-1]
    return f"{first[0].upper()} {last.capitalize()}"


def build_vocabulary(raw_docs, spec):
    """Filter tokens and build the vocabulary.

    ``raw_docs`` is a list of token-string lists.  Stopwords, tokens in
    more than ``common_threshold`` of the documents and tokens with
    corpus frequency below ``rare_count`` are dropped.  Returns
    (vocabulary list, encoded documents as index lists).
    """
    n_docs = len(raw_docs)
    doc_freq = {}
    corpus_freq = {}
    for tokens in raw_docs:
        for tok in set(tokens):
            doc_freq[tok] = doc_freq.get(tok, 0) + 1
        for tok in tokens:
            corpus_freq[tok] = corpus_freq.get(tok, 0) + 1
    keep = {
        tok
        for tok in corpus_freq
        if tok not in spec.stopwords
        and doc_freq[tok] <= spec.common_threshold * n_docs
        and corpus_freq[tok] >= spec.rare_count
    }
    if not keep:
        raise ValueError(
            "vocabulary filter removed every token; relax the thresholds"
        )
    vocabulary = sorted(keep)
    index = {w: i for i, w in enumerate(vocabulary)}
    encoded = [[index[t] for t in tokens if t in index] for tokens in raw_docs]
    return vocabulary, encoded


def load_linqs(content_path, cites_path):
    """Load a LINQS content/cites dataset pair.

    Content lines: ``<id> <0/1 attribute vector> <label>``; the boolean
    attributes become single-occurrence tokens named w0..w{n-1}.  Cites
    lines are ``<cited-id> <citing-id>`` and produce citing->cited
    edges; unknown ids are skipped and counted.  Returns
    (corpus, graph, info).
    """
    docs = []
    ids = {}
    labels = set()
    n_attrs = None
    with open(content_path) as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 3:
                raise CorpusFormatError("expected id, attributes, label", line_no)
            doc_id, attrs, label = parts[0], parts[1:-1], parts[-1]
            if n_attrs is None:
                n_attrs = len(attrs)
            elif len(attrs) != n_attrs:
                raise CorpusFormatError(
                    f"expected {n_attrs} attributes, got {len(attrs)}", line_no
                )
            if doc_id in ids:
                raise CorpusFormatError(f"duplicate document id {doc_id!r}", line_no)
            try:
                tokens = [i for i, flag in enumerate(attrs) if int(flag) == 1]
            except ValueError as exc:
                raise CorpusFormatError(f"non-boolean attribute: {exc}", line_no)
            ids[doc_id] = len(docs)
            labels.add(label)
            docs.append(Document(id=doc_id, tokens=tokens, n_title=0,
                                 first_author=0, class_label=label))
    vocabulary = [f"w{i}" for i in range(n_attrs or 0)]
    edges = []
    skipped_edges = 0
    with open(cites_path) as fh:
        for line_no, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise CorpusFormatError("expected cited-id citing-id", line_no)
            cited, citing = parts
            if cited not in ids or citing not in ids:
                skipped_edges += 1
                continue
            edges.append((ids[citing], ids[cited]))
    corpus = Corpus(documents=docs, vocabulary=vocabulary,
                    authors=[FALLBACK_AUTHOR], class_names=sorted(labels))
    graph = CitationGraph(len(docs), edges)
    info = {"documents": len(docs), "skipped_edges": skipped_edges,
            "dropped_documents": 0, "edges": len(edges)}
    return corpus, graph, info


def load_generic(path, filter_spec=None, exclusion_words=DEFAULT_EXCLUSION_WORDS,
                 phrases=None):
    """Load a JSON-lines corpus and run the full ingestion pipeline.

    Each line is one record with fields id, title, abstract, authors
    (ordered list), citations (list of ids) and optional label.  The
    first listed author is taken as the document's author; documents
    without any usable author share one fallback author.
    """
    filter_spec = filter_spec or VocabularyFilterSpec()
    records = []
    ids = {}
    dropped = 0
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON: {exc}", line_no)
            if "id" not in rec:
                raise CorpusFormatError("record missing 'id'", line_no)
            doc_id = str(rec["id"])
            if doc_id in ids:
                raise CorpusFormatError(f"duplicate document id {doc_id!r}", line_no)
            title = rec.get("title") or ""
            abstract = rec.get("abstract") or ""
            if not title.strip() and not abstract.strip():
                dropped += 1
                continue
            ids[doc_id] = len(records)
            records.append((doc_id, title, abstract, rec.get("authors") or [],
                            rec.get("citations") or [], rec.get("label")))

    author_index = {FALLBACK_AUTHOR: 0}
    authors = [FALLBACK_AUTHOR]
    raw_docs = []
    title_counts = []
    doc_meta = []
    for doc_id, title, abstract, author_list, citations, label in records:
        name = None
        if author_list:
            name = normalize_author_name(str(author_list[0]), exclusion_words)
        if name is None:
            a_idx = 0
        else:
            a_idx = author_index.setdefault(name, len(authors))
            if a_idx == len(authors):
                authors.append(name)
        title_toks = tokenize(title, phrases)
        body_toks = tokenize(abstract, phrases)
        raw_docs.append(title_toks + body_toks)
        title_counts.append(len(title_toks))
        doc_meta.append((doc_id, a_idx, citations, label))

    vocabulary, encoded_full = build_vocabulary(raw_docs, filter_spec)
    vocab_index = {w: i for i, w in enumerate(vocabulary)}

    docs = []
    final_ids = {}
    empty_dropped = 0
    for (doc_id, a_idx, citations, label), raw, n_title_raw in zip(
            doc_meta, raw_docs, title_counts):
        title_enc = [vocab_index[t] for t in raw[:n_title_raw] if t in vocab_index]
        body_enc = [vocab_index[t] for t in raw[n_title_raw:] if t in vocab_index]
        tokens = title_enc + body_enc
        if not tokens:
            empty_dropped += 1
            continue
        final_ids[doc_id] = len(docs)
        docs.append(Document(id=doc_id, tokens=tokens, n_title=len(title_enc),
                             first_author=a_idx, class_label=label))

    edges = []
    skipped_edges = 0
    for (doc_id, _a, citations, _l) in doc_meta:
        if doc_id not in final_ids:
            continue
        for cited in citations:
            cited = str(cited)
            if cited in final_ids:
                edges.append((final_ids[doc_id], final_ids[cited]))
            else:
                skipped_edges += 1

    labels = sorted({d.class_label for d in docs if d.class_label is not None})
    corpus = Corpus(documents=docs, vocabulary=vocabulary, authors=authors,
                    class_names=labels)
    graph = CitationGraph(len(docs), edges)
    info = {"documents": len(docs), "skipped_edges": skipped_edges,
            "dropped_documents": dropped + empty_dropped, "edges": len(edges)}
    return corpus, graph, info


def merge_authors(corpus, eta, use_labels=False):
    """Merge authors with fewer than ``eta`` training publications.

    Merged documents are reassigned to a dummy author named after their
    class label when ``use_labels`` is set, otherwise to one shared
    dummy author.  ``eta == 1`` leaves authorship unchanged.  Returns a
    new Corpus; the input is not modified.
    """
    if eta < 1:
        raise ValueError("eta must be at least 1")
    if eta == 1:
        return corpus
    pub_counts = {}
    for doc in corpus.documents:
        if doc.split == "train" and doc.first_author is not None:
            pub_counts[doc.first_author] = pub_counts.get(doc.first_author, 0) + 1
    small = {a for a in range(len(corpus.authors))
             if pub_counts.get(a, 0) < eta}
    if use_labels:
        missing = [d.id for d in corpus.documents
                   if (d.first_author in small or d.first_author is None)
                   and d.class_label is None]
        if missing:
            raise ValueError(
                "use_labels requires class labels on merged documents; "
                f"missing for: {', '.join(missing)}"
            )

    new_authors = []
    new_index = {}

    def intern(name):
        idx = new_index.setdefault(name, len(new_authors))
        if idx == len(new_authors):
            new_authors.append(name)
        return idx

    new_docs = []
    for doc in corpus.documents:
        a = doc.first_author
        if a is None or a in small:
            name = f"label:{doc.class_label}" if use_labels else MERGED_AUTHOR
        else:
            name = corpus.authors[a]
        new_docs.append(Document(id=doc.id, tokens=list(doc.tokens),
                                 n_title=doc.n_title, first_author=intern(name),
                                 class_label=doc.class_label, split=doc.split))
    return Corpus(documents=new_docs, vocabulary=list(corpus.vocabulary),
                  authors=new_authors, class_names=list(corpus.class_names))


def split_corpus(corpus, test_fraction, rng):
    """Assign a uniform random train/test split in place.

    The test set size is floor(D * test_fraction); deterministic for a
    fixed generator state.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    n = corpus.n_documents
    n_test = int(n * test_fraction)
    order = rng.permutation(n)
    test_ids = set(order[:n_test].tolist())
    for i, doc in enumerate(corpus.documents):
        doc.split = "test" if i in test_ids else "train"
    return corpus


BUNDLE_VERSION = 1


def save_bundle(corpus, graph, path, info=None):
    """Write a corpus + graph bundle as a single JSON file."""
    payload = {
        "version": BUNDLE_VERSION,
        "vocabulary": corpus.vocabulary,
        "authors": corpus.authors,
        "class_names": corpus.class_names,
        "documents": [
            {"id": d.id, "tokens": d.tokens, "n_title": d.n_title,
             "author": d.first_author, "label": d.class_label, "split": d.split}
            for d in corpus.documents
        ],
        "edges": [[int(s), int(t)] for s, t in zip(graph.src, graph.dst)],
        "info": info or {},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_bundle(path):
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("version") != BUNDLE_VERSION:
        raise ValueError(
            f"unsupported bundle version {payload.get('version')!r}"
        )
    docs = [
        Document(id=d["id"], tokens=list(d["tokens"]), n_title=d["n_title"],
                 first_author=d["author"], class_label=d["label"],
                 split=d["split"])
        for d in payload["documents"]
    ]
    corpus = Corpus(documents=docs, vocabulary=payload["vocabulary"],
                    authors=payload["authors"],
                    class_names=payload["class_names"])
    graph = CitationGraph(len(docs), [tuple(e) for e in payload["edges"]])
    return corpus, graph, payload.get("info", {})


def load_stopwords(path):
    with open(path) as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())
