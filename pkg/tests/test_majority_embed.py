"""Majority baselines, the embedding classifier, and the random baseline."""

import numpy as np
import pytest

from prosolab.corpus_io import EmbeddingTable
from prosolab.taggers.common import LabeledSentence
from prosolab.taggers.embed import predict_embed, train_embed_classifier
from prosolab.taggers.majority import (
    predict_majority,
    train_majority,
    MajorityModel,
)
from prosolab.taggers.random_baseline import predict_random


def corpus_from_pairs(*sentences):
    return [LabeledSentence(list(tokens), list(labels))
            for tokens, labels in sentences]


# ---------------------------------------------------------------------------
# majority
# ---------------------------------------------------------------------------

def test_majority_counts_per_type():
    corpus = corpus_from_pairs(
        (["tell", "me"], [1, 0]),
        (["Tell", "me"], [1, 0]),
        (["tell", "him"], [2, 0]),
    )
    model = train_majority(corpus)
    # "tell" saw labels 1, 1, 2 -> argmax 1; case folds into one type
    assert model.per_word["tell"].tolist() == [0, 2, 1]
    assert predict_majority(model, ["tell"]) == [1]
    assert predict_majority(model, ["TELL"]) == [1]


def test_majority_na_contributes_nothing():
    corpus = corpus_from_pairs(
        ([",", "me"], [None, 0]),
        (["me", "."], [2, None]),
    )
    model = train_majority(corpus)
    assert "," not in model.per_word
    assert "." not in model.per_word
    assert model.global_counts.tolist() == [1, 0, 1]


def test_majority_unseen_word_falls_back_to_global():
    corpus = corpus_from_pairs(
        (["a"] * 10 + ["b"] * 5 + ["c"] * 5,
         [0] * 10 + [1] * 5 + [2] * 5),
    )
    model = train_majority(corpus)
    assert predict_majority(model, ["unseen"]) == [0]
    assert predict_majority(model, ["b", "unseen", "c"]) == [1, 0, 2]


def test_majority_global_mode_ignores_types():
    corpus = corpus_from_pairs((["a", "b", "b"], [0, 1, 1]))
    model = train_majority(corpus)
    assert predict_majority(model, ["a", "b"], mode="global") == [1, 1]


def test_majority_tie_takes_smaller_label():
    corpus = corpus_from_pairs((["w", "w"], [2, 1]))
    model = train_majority(corpus)
    assert predict_majority(model, ["w"]) == [1]


def test_majority_punctuation_predicts_na():
    corpus = corpus_from_pairs((["a"], [1]))
    model = train_majority(corpus)
    assert predict_majority(model, ["a", ",", "a", "?"]) == [1, None, 1, None]


def test_majority_training_accuracy_is_class_frequency():
    # in global mode, training accuracy equals the majority class share
    rng = np.random.default_rng(4)
    labels = rng.integers(0, 3, size=200).tolist()
    corpus = corpus_from_pairs(([f"t{i}" for i in range(200)], labels))
    model = train_majority(corpus)
    predicted = predict_majority(model, corpus[0].tokens, mode="global")
    hits = sum(p == g for p, g in zip(predicted, labels))
    assert hits == max(np.bincount(labels, minlength=3))


def test_majority_rejects_all_na_and_untrained():
    with pytest.raises(ValueError, match="all-NA corpus"):
        train_majority(corpus_from_pairs(([","], [None])))
    with pytest.raises(ValueError, match="untrained model"):
        predict_majority(MajorityModel(), ["a"])
    model = train_majority(corpus_from_pairs((["a"], [0])))
    with pytest.raises(ValueError, match="unknown mode"):
        predict_majority(model, ["a"], mode="typo")


# ---------------------------------------------------------------------------
# embedding classifier
# ---------------------------------------------------------------------------

def separable_table():
    # two word groups pushed to opposite corners of a 4-dim space
    entries = {}
    for i, word in enumerate(["low1", "low2", "low3"]):
        entries[word] = np.array([1.0, 0.0, 0.1 * i, 0.0])
    for i, word in enumerate(["high1", "high2", "high3"]):
        entries[word] = np.array([0.0, 1.0, 0.0, 0.1 * i])
    return EmbeddingTable(dimension=4, entries=entries)


def separable_corpus():
    return corpus_from_pairs(
        (["low1", "high1"], [0, 2]),
        (["low2", "high2", "."], [0, 2, None]),
        (["high3", "low3"], [2, 0]),
        (["low1", "high3"], [0, 2]),
    )


def test_embed_fits_separable_corpus():
    table = separable_table()
    clf = train_embed_classifier(separable_corpus(), table)
    for sent in separable_corpus():
        assert predict_embed(clf, sent.tokens) == sent.labels
    # held-out pairing of the same word groups
    assert predict_embed(clf, ["high2", "low2"]) == [2, 0]


def test_embed_zero_table_learns_priors():
    # with no usable vectors only the bias is informative, so every word
    # gets the most frequent label
    table = EmbeddingTable(dimension=3, entries={})
    corpus = corpus_from_pairs(
        (["a", "b", "c"], [1, 1, 0]),
        (["d", "e"], [1, 2]),
    )
    clf = train_embed_classifier(corpus, table)
    assert predict_embed(clf, ["anything", "at", "all"]) == [1, 1, 1]


def test_embed_case_fallback_lookup():
    table = separable_table()
    clf = train_embed_classifier(separable_corpus(), table)
    # uppercase token falls back to its lowercase vector
    assert predict_embed(clf, ["LOW1", "HIGH1"]) == [0, 2]


def test_embed_punctuation_predicts_na():
    clf = train_embed_classifier(separable_corpus(), separable_table())
    assert predict_embed(clf, ["low1", ",", "high1"]) == [0, None, 2]


def test_embed_window_uses_neighbors():
    # the center word is ambiguous; only context disambiguates
    entries = {
        "amb": np.array([0.0, 0.0]),
        "ctxa": np.array([1.0, 0.0]),
        "ctxb": np.array([0.0, 1.0]),
    }
    table = EmbeddingTable(dimension=2, entries=entries)
    corpus = corpus_from_pairs(
        (["ctxa", "amb"], [0, 0]),
        (["ctxb", "amb"], [1, 1]),
        (["ctxa", "amb"], [0, 0]),
        (["ctxb", "amb"], [1, 1]),
    )
    clf = train_embed_classifier(corpus, table)
    assert predict_embed(clf, ["ctxa", "amb"])[1] == 0
    assert predict_embed(clf, ["ctxb", "amb"])[1] == 1


def test_embed_training_deterministic():
    a = train_embed_classifier(separable_corpus(), separable_table())
    b = train_embed_classifier(separable_corpus(), separable_table())
    assert a.weight_matrix.tobytes() == b.weight_matrix.tobytes()


def test_embed_rejects_empty_and_all_na():
    table = separable_table()
    with pytest.raises(ValueError, match="empty corpus"):
        train_embed_classifier([], table)
    with pytest.raises(ValueError, match="all-NA corpus"):
        train_embed_classifier(corpus_from_pairs(([","], [None])), table)


def test_embed_label_set_from_corpus():
    table = separable_table()
    corpus = corpus_from_pairs((["low1", "high1"], [0, 1]))
    clf = train_embed_classifier(corpus, table)
    assert clf.labels == [0, 1]
    assert clf.weight_matrix.shape == (2, 3 * 4 + 1)


# ---------------------------------------------------------------------------
# random baseline
# ---------------------------------------------------------------------------

def test_random_baseline_seeded_and_masked():
    tokens = ["a", "b", ",", "c", "d", "."]
    first = predict_random(tokens, [0, 1, 2], np.random.default_rng(13))
    second = predict_random(tokens, [0, 1, 2], np.random.default_rng(13))
    assert first == second
    assert first[2] is None and first[5] is None
    assert all(lab in (0, 1, 2) for i, lab in enumerate(first)
               if i not in (2, 5))


def test_random_baseline_covers_label_set():
    rng = np.random.default_rng(0)
    draws = predict_random(["w"] * 300, [0, 1, 2], rng)
    assert set(draws) == {0, 1, 2}


def test_random_baseline_rejects_empty_labels():
    with pytest.raises(ValueError, match="empty label set"):
        predict_random(["a"], [], np.random.default_rng(0))
