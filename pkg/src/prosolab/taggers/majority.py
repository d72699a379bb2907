"""Majority-class baselines: global and per-word-type."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .common import LabeledSentence, na_mask

N_LABELS = 3


@dataclass
class MajorityModel:
    per_word: dict[str, np.ndarray] = field(default_factory=dict)
    global_counts: np.ndarray = field(
        default_factory=lambda: np.zeros(N_LABELS, dtype=np.int64))


def train_majority(corpus: list[LabeledSentence]) -> MajorityModel:
    """Count labels per lowercased word type; NA positions contribute nothing."""
    model = MajorityModel()
    seen = False
    for sent in corpus:
        for token, label in zip(sent.tokens, sent.labels):
            if label is None:
                continue
            seen = True
            key = token.lower()
            counts = model.per_word.get(key)
            if counts is None:
                counts = np.zeros(N_LABELS, dtype=np.int64)
                model.per_word[key] = counts
            counts[label] += 1
            model.global_counts[label] += 1
    if not seen:
        raise ValueError("all-NA corpus: nothing to count")
    return model


def _argmax_label(counts: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the smallest label on ties
    return int(np.argmax(counts))


def predict_majority(model: MajorityModel, tokens: list[str],
                     mode: str = "per_word") -> list[int | None]:
    """Most frequent label per word type (falling back to the global majority
    for unseen words) or the global majority everywhere."""
    if mode not in ("per_word", "global"):
        raise ValueError(f"unknown mode {mode!r}")
    if model.global_counts.sum() == 0:
        raise ValueError("untrained model")
    global_label = _argmax_label(model.global_counts)
    out: list[int | None] = []
    for token, punct in zip(tokens, na_mask(tokens)):
        if punct:
            out.append(None)
        elif mode == "global":
            out.append(global_label)
        else:
            counts = model.per_word.get(token.lower())
            out.append(global_label if counts is None
                       else _argmax_label(counts))
    return out
