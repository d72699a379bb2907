"""Parsers and writers for every on-disk format the toolkit touches.

Covers PCM WAV audio, word alignments (``.lab`` lines and long-form Praat
TextGrid interval tiers), the tab-separated prominence dataset, and plain-text
word-embedding tables.  All parsers are pure functions over bytes or text;
UTF-8 is assumed everywhere and CRLF is normalized to LF before parsing.
"""

from __future__ import annotations

import io
import re
import unicodedata
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

INT16_SCALE = 32768.0


class CorpusFormatError(ValueError):
    """Raised when an input file violates its declared format."""


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass
class AudioBuffer:
    """Mono audio samples in [-1, 1] with their sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class Token:
    text: str
    start_s: float
    end_s: float
    is_punct: bool


@dataclass
class Utterance:
    id: str
    speaker: str
    tokens: list[Token]

    def word_indices(self) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if not t.is_punct]


@dataclass
class ProminenceRecord:
    """One dataset row: a token with its discrete and continuous labels.

    ``discrete`` and ``continuous`` are ``None`` together, exactly for
    punctuation tokens; the file format renders that as the literal ``NA``.
    """

    token: str
    discrete: int | None
    continuous: float | None


@dataclass
class EmbeddingTable:
    """Token -> vector map; absent tokens look up as the all-zero vector."""

    dimension: int
    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def lookup(self, token: str) -> np.ndarray:
        vec = self.entries.get(token)
        if vec is None:
            return np.zeros(self.dimension)
        return vec


def is_punctuation(text: str) -> bool:
    """True iff every character belongs to a Unicode punctuation category."""
    return bool(text) and all(
        unicodedata.category(ch).startswith("P") for ch in text
    )


# ---------------------------------------------------------------------------
# input coercion helpers
# ---------------------------------------------------------------------------

def _as_bytes(source: bytes | str | Path | BinaryIO) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _as_text(source: bytes | str | Path | BinaryIO) -> str:
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        raw = Path(source).read_bytes()
    elif isinstance(source, str):
        raw = source.encode("utf-8")
    else:
        raw = _as_bytes(source)
    return raw.decode("utf-8").replace("\r\n", "\n").replace("\r", "\n")


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def read_wav(source: bytes | str | Path | BinaryIO) -> AudioBuffer:
    """Read a RIFF/WAVE file with 16-bit mono PCM payload.

    Samples are scaled to [-1, 1] by dividing by 32768.  Anything outside the
    supported subset (stereo, non-PCM, other sample widths) is rejected with a
    reason rather than converted.
    """
    raw = _as_bytes(source)
    try:
        with wave.open(io.BytesIO(raw)) as wav:
            n_channels = wav.getnchannels()
            if n_channels != 1:
                raise CorpusFormatError(
                    f"unsupported channel count: {n_channels} (mono required)"
                )
            width = wav.getsampwidth()
            if width != 2:
                raise CorpusFormatError(
                    f"unsupported sample width: {8 * width} bit (16-bit required)"
                )
            if wav.getcomptype() != "NONE":
                raise CorpusFormatError(
                    f"unsupported encoding: {wav.getcomptype()} (PCM required)"
                )
            rate = wav.getframerate()
            payload = wav.readframes(wav.getnframes())
    except wave.Error as exc:
        raise CorpusFormatError(f"malformed or unsupported WAV: {exc}") from exc
    if rate <= 0:
        raise CorpusFormatError(f"invalid sample rate: {rate}")
    samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / INT16_SCALE
    if len(samples) == 0:
        raise CorpusFormatError("empty audio payload")
    return AudioBuffer(samples=samples, sample_rate=rate)


# ---------------------------------------------------------------------------
# alignments
# ---------------------------------------------------------------------------

def _check_token_order(tokens: list[Token], context: str) -> None:
    prev_end = 0.0
    for tok in tokens:
        if tok.start_s < prev_end - 1e-9:
            raise CorpusFormatError(
                f"{context}: token {tok.text!r} at {tok.start_s:.3f}s "
                f"overlaps previous token ending at {prev_end:.3f}s"
            )
        prev_end = max(prev_end, tok.end_s)


def _require_words(tokens: list[Token], context: str) -> None:
    if not any(not t.is_punct for t in tokens):
        raise CorpusFormatError(f"{context}: no non-punctuation tokens")


def parse_lab(
    source: bytes | str | Path | BinaryIO,
    utt_id: str = "",
    speaker: str = "",
) -> Utterance:
    """Parse ``start end token`` alignment lines into an Utterance.

    Fields are separated by tabs or spaces; zero-length spans are allowed for
    punctuation tokens only.
    """
    text = _as_text(source)
    tokens: list[Token] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) != 3:
            raise CorpusFormatError(f"line {lineno}: expected 'start end token'")
        try:
            start = float(parts[0])
            end = float(parts[1])
        except ValueError as exc:
            raise CorpusFormatError(f"line {lineno}: non-numeric time") from exc
        word = parts[2]
        punct = is_punctuation(word)
        if start < 0:
            raise CorpusFormatError(f"line {lineno}: negative start time")
        if end < start:
            raise CorpusFormatError(f"line {lineno}: end before start")
        if end == start and not punct:
            raise CorpusFormatError(
                f"line {lineno}: zero-length span for non-punctuation token {word!r}"
            )
        tokens.append(Token(text=word, start_s=start, end_s=end, is_punct=punct))
    if not tokens:
        raise CorpusFormatError("no alignment lines")
    _check_token_order(tokens, "lab alignment")
    _require_words(tokens, "lab alignment")
    return Utterance(id=utt_id, speaker=speaker, tokens=tokens)


_TG_ITEM_RE = re.compile(r"item\s*\[\d+\]\s*:")
_TG_NUM_RE = re.compile(r"=\s*([-+0-9.eE]+)")
_TG_STR_RE = re.compile(r'=\s*"((?:[^"]|"")*)"')


def _tg_field(line: str, kind: str, context: str) -> float | str:
    if kind == "num":
        m = _TG_NUM_RE.search(line)
        if m is None:
            raise CorpusFormatError(f"{context}: expected a number in {line!r}")
        try:
            return float(m.group(1))
        except ValueError as exc:
            raise CorpusFormatError(f"{context}: bad number in {line!r}") from exc
    m = _TG_STR_RE.search(line)
    if m is None:
        raise CorpusFormatError(f"{context}: expected a quoted string in {line!r}")
    return m.group(1).replace('""', '"')


def parse_textgrid(
    source: bytes | str | Path | BinaryIO,
    tier_name: str,
    utt_id: str = "",
    speaker: str = "",
) -> Utterance:
    """Extract one IntervalTier of a long-form Praat TextGrid as an Utterance.

    Intervals with empty text (silences) are skipped.  Only the long textual
    format is supported; point tiers are ignored.
    """
    text = _as_text(source)
    lines = [ln.strip() for ln in text.split("\n")]

    # split into per-item line blocks
    item_starts = [i for i, ln in enumerate(lines) if _TG_ITEM_RE.fullmatch(ln)]
    tiers: dict[str, list[str]] = {}
    for idx, start in enumerate(item_starts):
        stop = item_starts[idx + 1] if idx + 1 < len(item_starts) else len(lines)
        block = lines[start:stop]
        cls = name = None
        for ln in block:
            if ln.startswith("class"):
                cls = _tg_field(ln, "str", "tier header")
            elif ln.startswith("name"):
                name = _tg_field(ln, "str", "tier header")
                break
        if cls == "IntervalTier" and name is not None:
            tiers[str(name)] = block

    if tier_name not in tiers:
        available = ", ".join(sorted(tiers)) or "none"
        raise CorpusFormatError(
            f"no IntervalTier named {tier_name!r}; available tiers: {available}"
        )

    block = tiers[tier_name]
    tokens: list[Token] = []
    i = 0
    while i < len(block):
        if re.fullmatch(r"intervals\s*\[\d+\]\s*:", block[i]):
            if i + 3 > len(block):
                raise CorpusFormatError("truncated interval block")
            ctx = f"interval block at tier {tier_name!r}"
            if not block[i + 1].startswith("xmin"):
                raise CorpusFormatError(f"{ctx}: expected xmin, got {block[i+1]!r}")
            if not block[i + 2].startswith("xmax"):
                raise CorpusFormatError(f"{ctx}: expected xmax, got {block[i+2]!r}")
            if not block[i + 3].startswith("text"):
                raise CorpusFormatError(f"{ctx}: expected text, got {block[i+3]!r}")
            xmin = float(_tg_field(block[i + 1], "num", ctx))
            xmax = float(_tg_field(block[i + 2], "num", ctx))
            mark = str(_tg_field(block[i + 3], "str", ctx)).strip()
            if xmax < xmin:
                raise CorpusFormatError(
                    f"{ctx}: interval end {xmax} before start {xmin}"
                )
            if mark:
                punct = is_punctuation(mark)
                if xmax == xmin and not punct:
                    raise CorpusFormatError(
                        f"{ctx}: zero-length span for non-punctuation {mark!r}"
                    )
                tokens.append(
                    Token(text=mark, start_s=xmin, end_s=xmax, is_punct=punct)
                )
            i += 4
        else:
            i += 1
    if not tokens:
        raise CorpusFormatError(f"tier {tier_name!r} has no non-empty intervals")
    _check_token_order(tokens, f"tier {tier_name!r}")
    _require_words(tokens, f"tier {tier_name!r}")
    return Utterance(id=utt_id, speaker=speaker, tokens=tokens)


# ---------------------------------------------------------------------------
# prominence dataset
# ---------------------------------------------------------------------------

def format_record(rec: ProminenceRecord) -> str:
    if (rec.discrete is None) != (rec.continuous is None):
        raise CorpusFormatError(
            f"record {rec.token!r}: discrete and continuous must be NA together"
        )
    if rec.discrete is None:
        return f"{rec.token}\tNA\tNA"
    return f"{rec.token}\t{rec.discrete}\t{rec.continuous:.3f}"


def write_dataset(
    annotated: Iterable[tuple[Utterance, Sequence[ProminenceRecord]]],
) -> bytes:
    """Serialize annotated utterances to the tab-separated dataset format.

    One ``token<TAB>discrete<TAB>continuous`` line per token, continuous values
    with exactly 3 decimals, ``NA`` for punctuation; utterances separated by a
    single blank line; the stream ends with a newline (empty input -> empty
    stream).
    """
    blocks: list[str] = []
    for utt, records in annotated:
        if len(records) != len(utt.tokens):
            raise CorpusFormatError(
                f"utterance {utt.id!r}: {len(records)} records for "
                f"{len(utt.tokens)} tokens"
            )
        blocks.append("\n".join(format_record(r) for r in records))
    if not blocks:
        return b""
    return ("\n\n".join(blocks) + "\n").encode("utf-8")


def parse_dataset(
    source: bytes | str | Path | BinaryIO,
) -> list[list[ProminenceRecord]]:
    """Parse the dataset format back into per-sentence record lists.

    Round-trips ``write_dataset`` output up to the 3-decimal precision of the
    continuous column.
    """
    text = _as_text(source)
    sentences: list[list[ProminenceRecord]] = []
    current: list[ProminenceRecord] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise CorpusFormatError(
                f"line {lineno}: expected 3 tab-separated columns, got {len(cols)}"
            )
        token, d_str, c_str = cols
        if (d_str == "NA") != (c_str == "NA"):
            raise CorpusFormatError(
                f"line {lineno}: discrete and continuous must be NA together"
            )
        if d_str == "NA":
            current.append(ProminenceRecord(token, None, None))
            continue
        if d_str not in ("0", "1", "2"):
            raise CorpusFormatError(f"line {lineno}: label out of range: {d_str!r}")
        try:
            cont = float(c_str)
        except ValueError as exc:
            raise CorpusFormatError(
                f"line {lineno}: bad continuous value {c_str!r}"
            ) from exc
        if cont < 0:
            raise CorpusFormatError(f"line {lineno}: negative continuous value")
        current.append(ProminenceRecord(token, int(d_str), cont))
    if current:
        sentences.append(current)
    return sentences


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------

def load_embeddings(
    source: bytes | str | Path | BinaryIO, dimension: int
) -> EmbeddingTable:
    """Load a ``token v1 .. vD`` text table; first occurrence wins on duplicates."""
    if dimension <= 0:
        raise ValueError("dimension must be positive")
    text = _as_text(source)
    entries: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != dimension + 1:
            raise CorpusFormatError(
                f"line {lineno}: expected {dimension} values, got {len(parts) - 1}"
            )
        token = parts[0]
        if token in entries:
            continue
        try:
            vec = np.array([float(p) for p in parts[1:]])
        except ValueError as exc:
            raise CorpusFormatError(f"line {lineno}: non-numeric value") from exc
        entries[token] = vec
    return EmbeddingTable(dimension=dimension, entries=entries)
