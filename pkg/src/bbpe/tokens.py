"""Byte-level token values and their canonical text rendering.

A token is rendered as the uppercase hex of its octets, with a ``##``
prefix when it continues a word (``"E8"``, ``"##A9"``, ``"E8A992"``).
Special tokens and sentence stops are rendered verbatim.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import MalformedToken

TRAILING_PREFIX = "##"

DEFAULT_SPECIALS: tuple[str, ...] = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
DEFAULT_SENTENCE_STOPS: tuple[str, ...] = (".", "!", "?", "。", "！", "？")

# ASCII whitespace octets; a Word never contains one.
WHITESPACE_OCTETS = frozenset(b" \n\t\r")

_HEX_UPPER = frozenset("0123456789ABCDEF")


class Position(enum.IntEnum):
    # Order matters: used by the trainer's tie-break (leading sorts first).
    LEADING = 0
    TRAILING = 1


class Kind(enum.Enum):
    LEARNED = "learned"
    FALLBACK = "fallback"
    SPECIAL = "special"
    SENTENCE_STOP = "sentence_stop"


@dataclass(frozen=True)
class ByteToken:
    octets: bytes = b""
    position: Position = Position.LEADING
    kind: Kind = Kind.LEARNED
    text: str | None = None

    def __post_init__(self):
        if self.kind in (Kind.SPECIAL, Kind.SENTENCE_STOP):
            if not self.text or self.octets:
                raise ValueError(f"{self.kind.value} token needs text and no octets")
            return
        if self.text is not None:
            raise ValueError("byte tokens carry octets, not text")
        if not self.octets:
            raise ValueError("byte token must have at least one octet")
        if self.kind is Kind.FALLBACK and len(self.octets) != 1:
            raise ValueError("fallback tokens have exactly one octet")

    @classmethod
    def of(cls, octets: bytes, position: Position = Position.LEADING) -> "ByteToken":
        """Byte token with the kind inferred from its length."""
        kind = Kind.FALLBACK if len(octets) == 1 else Kind.LEARNED
        return cls(bytes(octets), Position(position), kind)

    @classmethod
    def special(cls, text: str) -> "ByteToken":
        return cls(b"", Position.LEADING, Kind.SPECIAL, text)

    @classmethod
    def sentence_stop(cls, text: str) -> "ByteToken":
        return cls(b"", Position.LEADING, Kind.SENTENCE_STOP, text)

    @property
    def is_bytes(self) -> bool:
        return self.kind in (Kind.LEARNED, Kind.FALLBACK)

    @property
    def trailing(self) -> bool:
        return self.position is Position.TRAILING

    def __str__(self):
        return render_token(self)


def render_token(token: ByteToken) -> str:
    if not token.is_bytes:
        return token.text
    hexed = token.octets.hex().upper()
    return TRAILING_PREFIX + hexed if token.position is Position.TRAILING else hexed


def parse_token(
    text: str,
    specials: Iterable[str] = DEFAULT_SPECIALS,
    sentence_stops: Iterable[str] = DEFAULT_SENTENCE_STOPS,
) -> ByteToken:
    """Inverse of :func:`render_token`.

    Registered specials and sentence stops are matched verbatim before any
    hex decoding. Lowercase hex is rejected so that files stay bit-exact.
    """
    if text in specials:
        return ByteToken.special(text)
    if text in sentence_stops:
        return ByteToken.sentence_stop(text)
    position = Position.LEADING
    body = text
    if body.startswith(TRAILING_PREFIX):
        position = Position.TRAILING
        body = body[len(TRAILING_PREFIX):]
    if not body or len(body) % 2 or not set(body) <= _HEX_UPPER:
        raise MalformedToken(f"not a rendered token: {text!r}")
    return ByteToken.of(bytes.fromhex(body), position)


def is_hex_body(text: str) -> bool:
    return bool(text) and len(text) % 2 == 0 and set(text) <= _HEX_UPPER


def all_fallbacks(distinguish_leading: bool = True) -> list[ByteToken]:
    """Single-octet tokens: 256 leading, then 256 trailing when distinguishing."""
    out = [ByteToken.of(bytes([b]), Position.LEADING) for b in range(256)]
    if distinguish_leading:
        out += [ByteToken.of(bytes([b]), Position.TRAILING) for b in range(256)]
    return out


@dataclass(frozen=True)
class Word:
    """Whitespace-free octet run; its first octet carries the leading label."""

    octets: bytes

    def __post_init__(self):
        if not self.octets:
            raise ValueError("empty word")
        if WHITESPACE_OCTETS.intersection(self.octets):
            raise ValueError(f"word contains a whitespace octet: {self.octets!r}")

    def symbols(self, distinguish_leading: bool = True) -> tuple[ByteToken, ...]:
        rest = Position.TRAILING if distinguish_leading else Position.LEADING
        return tuple(
            ByteToken.of(bytes([b]), Position.LEADING if i == 0 else rest)
            for i, b in enumerate(self.octets)
        )

    def text(self) -> str:
        return self.octets.decode("utf-8")


@dataclass(frozen=True)
class SentenceStop:
    char: str

    def text(self) -> str:
        return self.char


Segment = Union[Word, SentenceStop]


@dataclass(frozen=True)
class PreprocessedText:
    segments: tuple[Segment, ...] = ()

    def __iter__(self):
        return iter(self.segments)

    def __len__(self):
        return len(self.segments)

    def words(self) -> list[Word]:
        return [s for s in self.segments if isinstance(s, Word)]

    def text(self) -> str:
        """Rebuild the normalized text: segments joined by single spaces."""
        return " ".join(s.text() for s in self.segments)
