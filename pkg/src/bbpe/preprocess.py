"""Raw text to byte-level words.

Every CJK character, punctuation mark and sentence stop becomes its own
word; whitespace runs collapse to one space. Words are then converted to
their UTF-8 octets, while sentence stops stay as literal characters.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass
from functools import lru_cache

from .tokens import DEFAULT_SENTENCE_STOPS, PreprocessedText, SentenceStop, Word

# Inclusive code point intervals.
DEFAULT_CJK_RANGES: tuple[tuple[int, int], ...] = (
    (0x1100, 0x11FF),  # Hangul Jamo
    (0x3001, 0x303F),  # CJK Symbols and Punctuation (U+3000 is a space)
    (0x3040, 0x309F),  # Hiragana
    (0x30A0, 0x30FF),  # Katakana
    (0x3400, 0x4DBF),  # CJK Unified Ideographs Extension A
    (0x4E00, 0x9FFF),  # CJK Unified Ideographs
    (0xAC00, 0xD7AF),  # Hangul Syllables
)

PUNCTUATION_CATEGORIES = ("Pc", "Pd", "Pe", "Pf", "Pi", "Po", "Ps")


class CharClass(enum.Enum):
    CJK = "cjk"
    PUNCTUATION = "punctuation"
    SENTENCE_STOP = "sentence_stop"
    WHITESPACE = "whitespace"
    OTHER = "other"


def parse_ranges(text: str) -> tuple[tuple[int, int], ...]:
    """Parse ``"4E00-9FFF, 3400-4DBF"`` into inclusive intervals."""
    out = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        lo_v = int(lo.strip().removeprefix("U+"), 16)
        hi_v = int(hi.strip().removeprefix("U+"), 16) if sep else lo_v
        if hi_v < lo_v:
            raise ValueError(f"empty interval {part!r}")
        out.append((lo_v, hi_v))
    return tuple(out)


def format_ranges(ranges) -> str:
    return ", ".join(f"{lo:04X}-{hi:04X}" for lo, hi in ranges)


@dataclass(frozen=True)
class PreprocessConfig:
    cjk_ranges: tuple[tuple[int, int], ...] = DEFAULT_CJK_RANGES
    punctuation_categories: tuple[str, ...] = PUNCTUATION_CATEGORIES
    sentence_stops: tuple[str, ...] = DEFAULT_SENTENCE_STOPS
    nfc: bool = False

    def __post_init__(self):
        for stop in self.sentence_stops:
            if len(stop) != 1 or stop.isspace() or stop in "#0123456789ABCDEF":
                raise ValueError(f"invalid sentence stop {stop!r}")


class Preprocessor:
    def __init__(self, config: PreprocessConfig | None = None):
        self.config = config or PreprocessConfig()
        self._stops = frozenset(self.config.sentence_stops)
        self._cats = frozenset(self.config.punctuation_categories)
        self._ranges = tuple(sorted(self.config.cjk_ranges))
        self._cache: dict[str, CharClass] = {}

    def __getstate__(self):
        return {"config": self.config}

    def __setstate__(self, state):
        self.__init__(state["config"])

    def classify_char(self, ch: str) -> CharClass:
        cls = self._cache.get(ch)
        if cls is None:
            cls = self._cache[ch] = self._classify(ch)
        return cls

    def _classify(self, ch: str) -> CharClass:
        if ch in self._stops:
            return CharClass.SENTENCE_STOP
        if unicodedata.category(ch) in self._cats:
            return CharClass.PUNCTUATION
        cp = ord(ch)
        for lo, hi in self._ranges:
            if lo <= cp <= hi:
                return CharClass.CJK
            if cp < lo:
                break
        if ch.isspace():
            return CharClass.WHITESPACE
        return CharClass.OTHER

    def normalize(self, raw: str) -> str:
        if self.config.nfc:
            raw = unicodedata.normalize("NFC", raw)
        pieces = []
        classify = self.classify_char
        for ch in raw:
            cls = classify(ch)
            if cls is CharClass.OTHER:
                pieces.append(ch)
            elif cls is CharClass.WHITESPACE:
                pieces.append(" ")
            else:
                pieces.append(" " + ch + " ")
        return " ".join(w for w in "".join(pieces).split(" ") if w)

    def to_byte_words(self, normalized: str) -> PreprocessedText:
        segments = []
        for piece in normalized.split(" "):
            if not piece:
                continue
            if len(piece) == 1 and piece in self._stops:
                segments.append(SentenceStop(piece))
            else:
                segments.append(Word(piece.encode("utf-8")))
        return PreprocessedText(tuple(segments))

    def preprocess(self, raw: str) -> PreprocessedText:
        return self.to_byte_words(self.normalize(raw))

    def word_bytes(self, raw: str) -> list[bytes]:
        """Octets of each word in ``raw``, skipping sentence stops (fast path)."""
        stops = self._stops
        return [
            w.encode("utf-8")
            for w in self.normalize(raw).split(" ")
            if w and not (len(w) == 1 and w in stops)
        ]


@lru_cache(maxsize=None)
def default_preprocessor() -> Preprocessor:
    return Preprocessor()


def classify_char(ch: str) -> CharClass:
    return default_preprocessor().classify_char(ch)


def normalize(raw: str) -> str:
    return default_preprocessor().normalize(raw)


def to_byte_words(normalized: str) -> PreprocessedText:
    return default_preprocessor().to_byte_words(normalized)


def preprocess(raw: str) -> PreprocessedText:
    return default_preprocessor().preprocess(raw)
