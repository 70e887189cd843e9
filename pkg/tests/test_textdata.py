import numpy as np
import pytest

from partcoder.errors import DataError
from partcoder.textdata import (
    Corpus,
    apply_selection,
    document_frequencies,
    frequency_filter,
    information_gain_select,
    parse_corpus_file,
    tfidf,
    top_k_words,
)


def corpus_from(docs_terms, labels, vocab):
    """docs_terms: list of {term_string: count}."""
    index = {t: i for i, t in enumerate(vocab)}
    docs = tuple(
        tuple(sorted((index[t], c) for t, c in doc.items()))
        for doc in docs_terms
    )
    return Corpus(docs=docs, vocab=tuple(vocab), labels=np.asarray(labels))


def synthetic_df_corpus(spec, n_docs):
    """spec: {term: document_frequency}. Builds n_docs docs with exact dfs."""
    vocab = sorted(spec)
    docs = []
    for d in range(n_docs):
        doc = {t: 1 for t in vocab if d < spec[t]}
        doc["_filler"] = 1  # keeps every document nonempty
        docs.append(doc)
    vocab = vocab + ["_filler"]
    return corpus_from(docs, np.zeros(n_docs, dtype=int), vocab)


def test_parse_corpus_file(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("0\tcat:2 dog:1\n1\tfish:3\n0\tcat:1 fish:1\n")
    corpus = parse_corpus_file(path)
    assert corpus.n_docs == 3
    assert set(corpus.vocab) == {"cat", "dog", "fish"}
    np.testing.assert_array_equal(corpus.labels, [0, 1, 0])
    df = document_frequencies(corpus)
    assert df[corpus.vocab.index("cat")] == 2


def test_parse_corpus_bad_token(tmp_path):
    path = tmp_path / "corpus.txt"
    path.write_text("0\tcat\n")
    with pytest.raises(DataError, match="bad token"):
        parse_corpus_file(path)


def test_tfidf_ubiquitous_term_column_zero():
    corpus = corpus_from(
        [{"the": 3, "cat": 1}, {"the": 2, "dog": 1}],
        [0, 1], ["the", "cat", "dog"])
    X = tfidf(corpus)
    assert np.all(X[:, 0] == 0.0)  # idf = ln(2/2) = 0


def test_tfidf_single_doc_single_term():
    corpus = corpus_from([{"word": 5}], [0], ["word"])
    X = tfidf(corpus)
    # lone doc, lone term: idf = ln(1/1) = 0, so the row is all zero
    assert X.shape == (1, 1)
    assert X[0, 0] == 0.0


def test_tfidf_hand_ratio():
    # doc0 = {a:1, c:3}: idf_a = idf_c = ln 2; entries 0.25 ln2 and 0.75 ln2;
    # after max-normalization: a -> 1/3, c -> 1.0
    corpus = corpus_from(
        [{"a": 1, "c": 3}, {"b": 1}],
        [0, 1], ["a", "b", "c"])
    X = tfidf(corpus)
    assert X[0, 2] == pytest.approx(1.0)
    assert X[0, 0] == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_tfidf_range_and_empty_doc():
    corpus = Corpus(docs=((), ((0, 2),)), vocab=("t",),
                    labels=np.array([0, 1]))
    with pytest.warns(UserWarning, match="empty"):
        X = tfidf(corpus)
    assert np.all(X[0] == 0.0)
    assert X.min() >= 0.0 and X.max() <= 1.0


def test_tfidf_output_in_unit_interval():
    rng = np.random.default_rng(0)
    vocab = [f"t{i}" for i in range(30)]
    docs = []
    for _ in range(40):
        terms = rng.choice(30, size=rng.integers(1, 10), replace=False)
        docs.append({vocab[t]: int(rng.integers(1, 6)) for t in terms})
    corpus = corpus_from(docs, rng.integers(0, 3, 40), vocab)
    X = tfidf(corpus)
    assert X.min() >= 0.0 and X.max() <= 1.0


def test_frequency_filter_band():
    corpus = synthetic_df_corpus({"rare": 3, "low_ok": 4, "mid": 40,
                                  "high_ok": 70, "common": 71}, 100)
    filtered = frequency_filter(corpus, low=4, high=70)
    assert "rare" not in filtered.vocab      # df 3 < 4
    assert "common" not in filtered.vocab    # df 71 > 70
    assert {"low_ok", "mid", "high_ok"} <= set(filtered.vocab)
    df = document_frequencies(filtered)
    assert df[filtered.vocab.index("mid")] == 40


def test_frequency_filter_idempotent():
    corpus = synthetic_df_corpus({"a": 3, "b": 10, "c": 50, "d": 80}, 90)
    once = frequency_filter(corpus, low=4, high=70)
    twice = frequency_filter(once, low=4, high=70)
    assert once.vocab == twice.vocab
    assert once.docs == twice.docs


def test_information_gain_ubiquitous_term_zero():
    corpus = corpus_from(
        [{"every": 1, "a": 1}, {"every": 1}, {"every": 1, "b": 1},
         {"every": 2}],
        [0, 0, 1, 1], ["every", "a", "b"])
    sel = information_gain_select(corpus, 3)
    scores = dict(zip((corpus.vocab[i] for i in sel.kept_term_ids), sel.scores))
    assert scores["every"] == pytest.approx(0.0, abs=1e-12)


def test_information_gain_perfect_separator():
    # term present exactly in class-0 documents of a balanced 2-class corpus
    docs = [{"marker": 1, "x": 1} for _ in range(5)] + \
        [{"y": 1} for _ in range(5)]
    corpus = corpus_from(docs, [0] * 5 + [1] * 5, ["marker", "x", "y"])
    sel = information_gain_select(corpus, 1)
    assert corpus.vocab[sel.kept_term_ids[0]] in ("marker", "x", "y")
    assert sel.scores[0] == pytest.approx(np.log(2.0), abs=1e-12)


def test_information_gain_nonnegative_and_sorted():
    rng = np.random.default_rng(1)
    vocab = [f"t{i}" for i in range(20)]
    docs = []
    for _ in range(60):
        terms = rng.choice(20, size=rng.integers(1, 8), replace=False)
        docs.append({vocab[t]: 1 for t in terms})
    corpus = corpus_from(docs, rng.integers(0, 3, 60), vocab)
    sel = information_gain_select(corpus, 20)
    assert all(s >= 0.0 for s in sel.scores)
    assert all(a >= b for a, b in zip(sel.scores, sel.scores[1:]))


def test_information_gain_tie_break_lexicographic():
    # two identical-presence terms must rank alphabetically
    docs = [{"zeta": 1, "alpha": 1, "k": 1}, {"k": 1}]
    corpus = corpus_from(docs, [0, 1], ["zeta", "alpha", "k"])
    sel = information_gain_select(corpus, 3)
    names = [corpus.vocab[i] for i in sel.kept_term_ids]
    assert names.index("alpha") < names.index("zeta")


def test_information_gain_paper_scale_dims():
    # vocabulary reductions at the sizes used for the Reuters experiments
    rng = np.random.default_rng(2)
    vocab = [f"w{i:03d}" for i in range(500)]
    docs = []
    for _ in range(80):
        terms = rng.choice(500, size=rng.integers(5, 30), replace=False)
        docs.append({vocab[t]: 1 for t in terms})
    corpus = corpus_from(docs, rng.integers(0, 4, 80), vocab)
    for dims in (200, 300, 400):
        sel = information_gain_select(corpus, dims)
        assert len(sel.kept_term_ids) == dims
        reduced = apply_selection(corpus, sel)
        assert len(reduced.vocab) == dims


def test_information_gain_target_too_big():
    corpus = corpus_from([{"a": 1}], [0], ["a"])
    with pytest.raises(ValueError):
        information_gain_select(corpus, 2)


def test_apply_selection_reindexes():
    corpus = corpus_from(
        [{"a": 1, "b": 2}, {"b": 1, "c": 3}], [0, 1], ["a", "b", "c"])
    sel = information_gain_select(corpus, 2)
    reduced = apply_selection(corpus, sel)
    assert len(reduced.vocab) == 2
    df = document_frequencies(reduced)
    assert df.shape == (2,)


def test_top_k_words_identity_like():
    vocab = ("alpha", "beta", "gamma", "delta")
    w1 = np.array([
        [0.1, 9.0, 0.2, 0.3],
        [0.5, 0.1, 0.2, 4.0],
    ])
    reports = top_k_words(w1, vocab, k=2)
    assert reports[0][0] == ("beta", 9.0)
    assert reports[1][0] == ("delta", 4.0)
    for unit in reports:
        assert len(unit) == 2
        weights = [w for _, w in unit]
        assert all(a >= b for a, b in zip(weights, weights[1:]))


def test_top_k_words_k_too_big():
    with pytest.raises(ValueError):
        top_k_words(np.zeros((2, 3)), ("a", "b", "c"), k=4)


def test_top_k_words_vocab_mismatch():
    with pytest.raises(DataError):
        top_k_words(np.zeros((2, 3)), ("a", "b"), k=1)
