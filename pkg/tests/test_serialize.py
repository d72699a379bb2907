"""Model file round-trips for the three tagger types."""

import numpy as np
import pytest

from prosolab.corpus_io import CorpusFormatError, EmbeddingTable
from prosolab.taggers.common import LabeledSentence
from prosolab.taggers.crf import crf_train, viterbi
from prosolab.taggers.embed import predict_embed, train_embed_classifier
from prosolab.taggers.majority import predict_majority, train_majority
from prosolab.taggers.serialize import MAGIC, load_model, save_model

CORPUS = [
    LabeledSentence(["The", "cat", "runs", "."], [0, 2, 1, None]),
    LabeledSentence(["The", "dog", "sits"], [0, 2, 1]),
    LabeledSentence(["big", "cat", ",", "runs"], [1, 2, None, 1]),
]

TABLE = EmbeddingTable(dimension=2, entries={
    "cat": np.array([1.0, -0.5]),
    "dog": np.array([0.25, 1.0 / 3.0]),
    "the": np.array([0.0, 0.125]),
})


def test_majority_round_trip():
    model = train_majority(CORPUS)
    clone = load_model(save_model(model))
    assert sorted(clone.per_word) == sorted(model.per_word)
    for word in model.per_word:
        np.testing.assert_array_equal(clone.per_word[word],
                                      model.per_word[word])
    np.testing.assert_array_equal(clone.global_counts, model.global_counts)
    tokens = ["the", "cat", "unseen", "?"]
    assert predict_majority(clone, tokens) == predict_majority(model, tokens)


def test_crf_round_trip_exact():
    model = crf_train(CORPUS, max_iterations=60)
    clone = load_model(save_model(model))
    assert clone.labels == model.labels
    assert clone.feature_index == model.feature_index
    assert clone.l2_lambda == model.l2_lambda
    # repr floats survive the text round trip bit for bit
    assert clone.weights.tobytes() == model.weights.tobytes()
    tokens = ["The", "big", "cat", "runs", "."]
    assert viterbi(clone, tokens) == viterbi(model, tokens)


def test_embed_round_trip_exact():
    model = train_embed_classifier(CORPUS, TABLE)
    clone = load_model(save_model(model))
    assert clone.labels == model.labels
    assert clone.window == model.window
    assert clone.table.dimension == TABLE.dimension
    assert sorted(clone.table.entries) == sorted(TABLE.entries)
    for token in TABLE.entries:
        np.testing.assert_array_equal(clone.table.entries[token],
                                      TABLE.entries[token])
    assert clone.weight_matrix.tobytes() == model.weight_matrix.tobytes()
    tokens = ["the", "cat", ",", "dog"]
    assert predict_embed(clone, tokens) == predict_embed(model, tokens)


def test_save_is_byte_deterministic():
    for model in (train_majority(CORPUS),
                  crf_train(CORPUS, max_iterations=30),
                  train_embed_classifier(CORPUS, TABLE)):
        assert save_model(model) == save_model(model)


def test_double_round_trip_is_stable():
    model = crf_train(CORPUS, max_iterations=30)
    once = save_model(model)
    assert save_model(load_model(once)) == once


def test_save_rejects_unknown_type():
    with pytest.raises(TypeError, match="cannot serialize"):
        save_model(object())


def test_load_rejects_bad_header():
    with pytest.raises(CorpusFormatError, match="bad header"):
        load_model(b"something else\n")


def test_load_rejects_unknown_type():
    with pytest.raises(CorpusFormatError, match="unknown model type"):
        load_model(f"{MAGIC}\ntype=mystery\n".encode())


def test_load_rejects_truncation():
    data = save_model(crf_train(CORPUS, max_iterations=30))
    head = data.splitlines(keepends=True)
    with pytest.raises(CorpusFormatError):
        load_model(b"".join(head[: len(head) // 2]))


def test_load_rejects_state_count_mismatch():
    data = save_model(crf_train(CORPUS, max_iterations=30)).decode()
    broken = data.replace("states=4", "states=3").encode()
    with pytest.raises(CorpusFormatError, match="state count"):
        load_model(broken)
