"""Reuters-style text pipeline: sparse bag-of-words corpora, TF-IDF with
per-document max normalization into [0, 1], document-frequency band
filtering, information-gain vocabulary selection, and per-hidden-unit
top-word reports.

Corpus file format (one document per line):

    label<TAB>term:count term:count ...

where label is an integer class index and term is a vocabulary string.
"""

import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Corpus:
    """docs: per-document list of (term_id, count); vocab: ordered term
    strings; labels: one class index per document."""

    docs: tuple
    vocab: tuple
    labels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "docs",
                           tuple(tuple(doc) for doc in self.docs))
        object.__setattr__(self, "vocab", tuple(self.vocab))
        object.__setattr__(self, "labels",
                           np.asarray(self.labels, dtype=np.int64))
        if self.labels.shape != (len(self.docs),):
            raise DataError("need exactly one label per document")
        nv = len(self.vocab)
        for i, doc in enumerate(self.docs):
            for term_id, count in doc:
                if not (0 <= term_id < nv):
                    raise DataError(f"doc {i}: term id {term_id} out of range")
                if count <= 0:
                    raise DataError(f"doc {i}: counts must be positive")

    @property
    def n_docs(self):
        return len(self.docs)


@dataclass(frozen=True)
class VocabSelection:
    kept_term_ids: tuple
    scores: tuple

    def __post_init__(self):
        object.__setattr__(self, "kept_term_ids", tuple(self.kept_term_ids))
        object.__setattr__(self, "scores", tuple(self.scores))
        if len(set(self.kept_term_ids)) != len(self.kept_term_ids):
            raise DataError("kept term ids must be unique")
        if any(a < b for a, b in zip(self.scores, self.scores[1:])):
            raise DataError("selection scores must be nonincreasing")


def parse_corpus_file(path):
    """Read the label<TAB>term:count format into a Corpus."""
    docs = []
    labels = []
    vocab_index = {}
    vocab = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                label_part, _, rest = line.partition("\t")
                label = int(label_part)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad label field")
            counts = Counter()
            for token in rest.split():
                term, sep, count_s = token.rpartition(":")
                if not sep or not term:
                    raise DataError(f"{path}:{lineno}: bad token {token!r}")
                try:
                    count = int(count_s)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad count in {token!r}")
                if count <= 0:
                    raise DataError(f"{path}:{lineno}: count must be positive")
                if term not in vocab_index:
                    vocab_index[term] = len(vocab)
                    vocab.append(term)
                counts[vocab_index[term]] += count
            docs.append(tuple(sorted(counts.items())))
            labels.append(label)
    if not docs:
        raise DataError(f"{path}: empty corpus")
    return Corpus(docs=tuple(docs), vocab=tuple(vocab),
                  labels=np.asarray(labels))


def document_frequencies(corpus):
    df = np.zeros(len(corpus.vocab), dtype=np.int64)
    for doc in corpus.docs:
        for term_id, _ in doc:
            df[term_id] += 1
    return df


def tfidf(corpus):
    """Dense TF-IDF matrix (docs x vocab), each row max-normalized into [0, 1].

    tf is the within-document relative count; idf = ln(n_docs / df). Rows
    whose every entry is zero (empty documents, or all-ubiquitous terms)
    stay zero.
    """
    if corpus.n_docs == 0:
        raise DataError("empty corpus")
    m, nv = corpus.n_docs, len(corpus.vocab)
    df = document_frequencies(corpus)
    idf = np.zeros(nv)
    seen = df > 0
    idf[seen] = np.log(m / df[seen])

    X = np.zeros((m, nv))
    for i, doc in enumerate(corpus.docs):
        total = sum(count for _, count in doc)
        if total == 0 or not doc:
            warnings.warn(f"document {i} is empty; emitting a zero row")
            continue
        for term_id, count in doc:
            X[i, term_id] = (count / total) * idf[term_id]
        peak = X[i].max()
        if peak > 0.0:
            X[i] /= peak
    return X


def frequency_filter(corpus, low=4, high=70):
    """Drop terms whose document frequency is < low or > high; reindex vocab."""
    if low > high:
        raise ValueError("low must be <= high")
    df = document_frequencies(corpus)
    keep = [t for t in range(len(corpus.vocab)) if low <= df[t] <= high]
    remap = {old: new for new, old in enumerate(keep)}
    new_docs = []
    for doc in corpus.docs:
        new_docs.append(tuple(
            (remap[tid], count) for tid, count in doc if tid in remap
        ))
    return Corpus(
        docs=tuple(new_docs),
        vocab=tuple(corpus.vocab[t] for t in keep),
        labels=corpus.labels,
    )


def _entropy(counts):
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log(p)))


def information_gain_select(corpus, target_dim):
    """Rank terms by information gain of their binary presence against the
    class labels; keep the top target_dim.

    IG(t) = H(class) - [P(t) H(class | t present) + P(!t) H(class | t absent)]
    with natural-log entropies. Ties break lexicographically by term string.
    """
    nv = len(corpus.vocab)
    if target_dim > nv:
        raise ValueError(f"target_dim {target_dim} exceeds vocabulary size {nv}")
    m = corpus.n_docs
    classes = np.unique(corpus.labels)
    k = classes.size
    class_pos = {c: i for i, c in enumerate(classes)}

    class_counts = np.zeros(k)
    for label in corpus.labels:
        class_counts[class_pos[label]] += 1
    h_class = _entropy(class_counts)

    # per-term class counts among documents containing the term
    present = np.zeros((nv, k))
    df = np.zeros(nv)
    for doc, label in zip(corpus.docs, corpus.labels):
        ci = class_pos[label]
        for term_id, _ in doc:
            present[term_id, ci] += 1
            df[term_id] += 1

    gains = np.zeros(nv)
    for t in range(nv):
        p_t = df[t] / m
        absent = class_counts - present[t]
        cond = p_t * _entropy(present[t]) + (1.0 - p_t) * _entropy(absent)
        gains[t] = h_class - cond
    gains = np.maximum(gains, 0.0)  # clip tiny negative rounding

    order = sorted(range(nv), key=lambda t: (-gains[t], corpus.vocab[t]))
    kept = order[:target_dim]
    return VocabSelection(
        kept_term_ids=tuple(kept),
        scores=tuple(float(gains[t]) for t in kept),
    )


def apply_selection(corpus, selection):
    """Restrict a corpus to the selected vocabulary, reindexed in selection
    order."""
    remap = {old: new for new, old in enumerate(selection.kept_term_ids)}
    new_docs = []
    for doc in corpus.docs:
        new_docs.append(tuple(sorted(
            (remap[tid], count) for tid, count in doc if tid in remap
        )))
    return Corpus(
        docs=tuple(new_docs),
        vocab=tuple(corpus.vocab[t] for t in selection.kept_term_ids),
        labels=corpus.labels,
    )


def top_k_words(w1, vocab, k=20):
    """For each hidden unit (row of w1), the k terms with the largest
    connecting weights, sorted descending, as (word, weight) pairs."""
    w1 = np.asarray(w1, dtype=np.float64)
    n = w1.shape[1]
    if len(vocab) != n:
        raise DataError(f"vocab has {len(vocab)} terms for {n} input weights")
    if k > n:
        raise ValueError(f"k = {k} exceeds vocabulary size {n}")
    reports = []
    for row in w1:
        top = np.argsort(-row, kind="stable")[:k]
        reports.append([(vocab[t], float(row[t])) for t in top])
    return reports
