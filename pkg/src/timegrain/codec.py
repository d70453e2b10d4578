"""Anchor/offset temporal tokens.

A timestamp is quantised to whole tenths of a second and written as one
anchor token per decimal digit of the integer seconds (most significant
first) followed by a single offset token holding the tenths digit::

    2.5  -> <a2><f5>
    16.4 -> <a1><a6><f4>

Values of ten seconds or more use several anchors; the token inventory stays
at 20 symbols whatever the audio length.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, ShapeError, TokenParseError

N_TEMPORAL_TOKENS = 20
NUMERAL_KEYS = tuple("0123456789") + (".",)

TOKEN_RE = re.compile(r"<([af])([0-9])>")


class TokenKind(enum.Enum):
    ANCHOR = "a"
    OFFSET = "f"


@dataclass(frozen=True)
class TemporalToken:
    kind: TokenKind
    digit: int

    def __post_init__(self):
        if not isinstance(self.digit, int) or not 0 <= self.digit <= 9:
            raise ValueError(f"token digit must be in [0, 9], got {self.digit!r}")

    def __str__(self) -> str:
        return f"<{self.kind.value}{self.digit}>"

    @classmethod
    def parse(cls, text: str) -> "TemporalToken":
        m = TOKEN_RE.fullmatch(text)
        if m is None:
            raise TokenParseError(f"not a temporal token: {text!r}", rule="token-form")
        return cls(TokenKind(m.group(1)), int(m.group(2)))


def anchor(d: int) -> TemporalToken:
    return TemporalToken(TokenKind.ANCHOR, d)


def offset(d: int) -> TemporalToken:
    return TemporalToken(TokenKind.OFFSET, d)


ALL_TOKENS = tuple(anchor(d) for d in range(10)) + tuple(offset(d) for d in range(10))


def quantize(t: float) -> int:
    """Seconds -> integer tenths, ties rounded away from zero.

    Ties are judged on the shortest decimal form of ``t`` (``repr``), so
    ``2.55`` rounds to 26 even though the binary double sits just below.
    """
    if isinstance(t, bool) or not isinstance(t, (int, float, Decimal, np.integer, np.floating)):
        raise ValueError(f"timestamp must be a real number, got {t!r}")
    if not (t.is_finite() if isinstance(t, Decimal) else math.isfinite(t)):
        raise ValueError(f"timestamp must be finite, got {t!r}")
    if t < 0:
        raise ValueError(f"timestamp must be non-negative, got {t!r}")
    if isinstance(t, Decimal):
        d = t
    elif isinstance(t, (int, np.integer)):
        d = Decimal(int(t))
    else:
        d = Decimal(repr(float(t)))
    return int((d * 10).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def tenths_to_seconds(tenths: int) -> float:
    return tenths / 10


def format_tenths(tenths: int) -> str:
    """Canonical one-decimal rendering of an integer tenths count."""
    if tenths < 0:
        raise ValueError(f"negative tenths: {tenths}")
    return f"{tenths // 10}.{tenths % 10}"


def encode_tenths(tenths: int) -> list[TemporalToken]:
    if tenths < 0:
        raise ValueError(f"negative tenths: {tenths}")
    whole, frac = divmod(tenths, 10)
    return [anchor(int(c)) for c in str(whole)] + [offset(frac)]


def encode_timestamp(t: float) -> list[TemporalToken]:
    return encode_tenths(quantize(t))


def decode_to_tenths(seq: Sequence[TemporalToken]) -> int:
    """Inverse of :func:`encode_tenths`.

    Grammar: one or more anchors, then exactly one offset, nothing after.
    """
    if len(seq) == 0:
        raise TokenParseError("empty token sequence", rule="empty", position=0)
    if seq[0].kind is TokenKind.OFFSET:
        raise TokenParseError(
            "sequence starts with an offset token; an anchor must come first",
            rule="anchor-first",
            position=0,
        )
    whole = 0
    for i, tok in enumerate(seq):
        if tok.kind is TokenKind.ANCHOR:
            whole = whole * 10 + tok.digit
            continue
        if i != len(seq) - 1:
            nxt = seq[i + 1]
            if nxt.kind is TokenKind.OFFSET:
                raise TokenParseError(
                    f"multiple offset tokens at position {i + 1}",
                    rule="single-offset",
                    position=i + 1,
                )
            raise TokenParseError(
                f"anchor token after the offset at position {i + 1}",
                rule="no-trailing-anchor",
                position=i + 1,
            )
        return whole * 10 + tok.digit
    raise TokenParseError(
        "sequence has no offset token", rule="missing-offset", position=len(seq)
    )


def decode_tokens(seq: Sequence[TemporalToken]) -> float:
    return tenths_to_seconds(decode_to_tenths(seq))


def tokens_to_text(seq: Iterable[TemporalToken]) -> str:
    return "".join(str(t) for t in seq)


def text_to_tokens(text: str) -> list[TemporalToken]:
    """Split ``"<a1><a6><f4>"`` into tokens; whitespace between tokens is allowed."""
    out = []
    pos = 0
    stripped = text.strip()
    while pos < len(stripped):
        if stripped[pos].isspace():
            pos += 1
            continue
        m = TOKEN_RE.match(stripped, pos)
        if m is None:
            raise TokenParseError(
                f"unexpected text at character {pos}: {stripped[pos:pos + 8]!r}",
                rule="token-form",
                position=pos,
            )
        out.append(TemporalToken(TokenKind(m.group(1)), int(m.group(2))))
        pos = m.end()
    return out


@dataclass(frozen=True)
class TemporalVocabulary:
    base_size: int
    token_ids: Mapping[TemporalToken, int]
    numeral_ids: Mapping[str, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.base_size + len(self.token_ids)

    def id_of(self, token: TemporalToken | str) -> int:
        if isinstance(token, str):
            token = TemporalToken.parse(token)
        return self.token_ids[token]

    def token_of(self, token_id: int) -> TemporalToken:
        for tok, i in self.token_ids.items():
            if i == token_id:
                return tok
        raise KeyError(token_id)


def extend_vocabulary(
    base_size: int, numeral_ids: Mapping[str, int] | None = None
) -> TemporalVocabulary:
    """Append the 20 temporal tokens after a base vocabulary of ``base_size``.

    Anchors ``<a0>..<a9>`` take ids ``base_size..base_size+9`` and offsets
    ``<f0>..<f9>`` the next ten. ``numeral_ids`` maps ``"0".."9"`` and ``"."``
    to their base-vocabulary ids; it is only needed for embedding init.
    """
    if base_size <= 0:
        raise ValueError(f"base_size must be positive, got {base_size}")
    numeral_ids = dict(numeral_ids or {})
    for key, idx in numeral_ids.items():
        if not 0 <= idx < base_size:
            raise ConfigError(f"numeral {key!r} id {idx} outside base vocabulary [0, {base_size})")
    token_ids = {tok: base_size + i for i, tok in enumerate(ALL_TOKENS)}
    return TemporalVocabulary(base_size, token_ids, numeral_ids)


def _init_rows(matrix: np.ndarray, vocab: TemporalVocabulary, what: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ShapeError(f"{what} must be 2-D")
    missing = [k for k in NUMERAL_KEYS if k not in vocab.numeral_ids]
    if missing:
        raise ConfigError(f"{what}: vocabulary lacks numeral ids for {missing}")
    rows = matrix.shape[0]
    if rows == vocab.base_size:
        out = np.zeros((vocab.size, matrix.shape[1]), dtype=np.float64)
        out[:rows] = matrix
    elif rows == vocab.size:
        out = matrix.copy()
    else:
        raise ShapeError(
            f"{what} has {rows} rows; expected {vocab.base_size} or {vocab.size}"
        )
    point = out[vocab.numeral_ids["."]]
    for d in range(10):
        numeral = out[vocab.numeral_ids[str(d)]]
        out[vocab.token_ids[anchor(d)]] = numeral
        out[vocab.token_ids[offset(d)]] = (numeral + point) / 2
    return out


def init_temporal_embeddings(table: np.ndarray, vocab: TemporalVocabulary) -> np.ndarray:
    """Anchor rows copy their numeral row; offset rows average numeral and ``"."``.

    Returns a ``(base_size + 20, d)`` table; base rows are left untouched.
    """
    return _init_rows(table, vocab, "embedding table")


def init_prediction_head(head: np.ndarray, vocab: TemporalVocabulary) -> np.ndarray:
    """Same initialisation as :func:`init_temporal_embeddings`, for output-head rows."""
    return _init_rows(head, vocab, "prediction head")
