"""Seeded uniform-random baseline over the label set."""

from __future__ import annotations

import numpy as np

from .common import na_mask


def predict_random(tokens: list[str], labels: list[int],
                   rng: np.random.Generator) -> list[int | None]:
    """Uniform draw per word position; NA at punctuation."""
    if not labels:
        raise ValueError("empty label set")
    out: list[int | None] = []
    for punct in na_mask(tokens):
        if punct:
            out.append(None)
        else:
            out.append(labels[int(rng.integers(len(labels)))])
    return out
