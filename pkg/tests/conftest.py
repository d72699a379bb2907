"""Shared fixtures: WAV byte synthesis, sine-word utterances, frozen dataset."""

from __future__ import annotations

import io
import wave

import numpy as np
import pytest

from prosolab.corpus_io import AudioBuffer, Token, Utterance

RATE = 16000

# Frozen reference sentence used by the format and discretization tests.
DATASET_SENTENCE = (
    "Tell\t2\t1.473\n"
    "me\t0\t0.333\n"
    "you\t0\t0.003\n"
    "rascal\t0\t0.167\n"
    ",\tNA\tNA\n"
    "where\t2\t2.160\n"
    "is\t0\t0.006\n"
    "the\t0\t0.037\n"
    "pig\t1\t0.719\n"
    "?\tNA\tNA\n"
)
DATASET_TOKENS = ["Tell", "me", "you", "rascal", ",",
                  "where", "is", "the", "pig", "?"]
DATASET_DISCRETE = [2, 0, 0, 0, None, 2, 0, 0, 1, None]
DATASET_CONTINUOUS = [1.473, 0.333, 0.003, 0.167, None,
                      2.160, 0.006, 0.037, 0.719, None]


def pcm16_wav_bytes(samples: np.ndarray, rate: int = RATE,
                    channels: int = 1, width: int = 2) -> bytes:
    """Encode float samples in [-1, 1] as a PCM WAV byte string."""
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(width)
        w.setframerate(rate)
        scaled = np.clip(samples, -1.0, 1.0)
        if width == 2:
            data = (scaled * 32767).astype("<i2").tobytes()
        else:
            data = ((scaled * 127) + 128).astype(np.uint8).tobytes()
        if channels == 2:
            data = data * 1  # caller passes interleaved samples already
        w.writeframes(data)
    return buf.getvalue()


def sine(freq: float, duration_s: float, amp: float = 0.5,
         rate: int = RATE) -> np.ndarray:
    n = round(duration_s * rate)
    return amp * np.sin(2 * np.pi * freq * np.arange(n) / rate)


def _ramp(n_seg: int, edge: int) -> np.ndarray:
    env = np.ones(n_seg)
    k = min(edge, n_seg // 2)
    if k > 0:
        r = 0.5 - 0.5 * np.cos(np.pi * np.arange(k) / k)
        env[:k] = r
        env[-k:] = r[::-1]
    return env


def make_word_fixture(saliences, gap_s: float = 0.18, margin_s: float = 0.09,
                      fade_s: float = 0.005, amp_boost=None,
                      rate: int = RATE) -> tuple[AudioBuffer, Utterance]:
    """Synthetic utterance of sine-burst words.

    Salience s in [0, 1] drives duration (0.25 + 0.35 s), amplitude
    (0.15 + 0.6 s), and pitch (120 + 160 s Hz) together, so a higher-salience
    word is longer, louder, and higher at once.  amp_boost, if given, is a
    per-word multiplicative amplitude factor on top of that.
    """
    pieces = [np.zeros(round(margin_s * rate))]
    tokens = []
    t = margin_s
    for i, s in enumerate(saliences):
        dur = 0.25 + 0.35 * s
        amp = 0.15 + 0.6 * s
        if amp_boost is not None:
            amp *= amp_boost[i]
        f0 = 120.0 + 160.0 * s
        n_seg = round(dur * rate)
        x = amp * np.sin(2 * np.pi * f0 * np.arange(n_seg) / rate)
        x *= _ramp(n_seg, round(fade_s * rate))
        pieces.append(x)
        tokens.append(Token(text=f"w{i}", start_s=t, end_s=t + dur,
                            is_punct=False))
        t += dur
        pieces.append(np.zeros(round(gap_s * rate)))
        t += gap_s
    pieces.append(np.zeros(round(margin_s * rate)))
    audio = AudioBuffer(samples=np.concatenate(pieces), sample_rate=rate)
    return audio, Utterance(id="fixture", speaker="", tokens=tokens)


@pytest.fixture
def word_fixture():
    return make_word_fixture
