"""Finalized vocabularies and their on-disk format.

A vocabulary file holds one rendered token per line; the line index is the
token id. Metadata lives in a sidecar ``<path>.meta`` of ``#!key = value``
lines (a leading ``#!`` block inside the vocabulary file is accepted too).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from .errors import DuplicateToken, MalformedLine, MalformedToken, VocabOverflow
from .tokens import (
    DEFAULT_SENTENCE_STOPS,
    DEFAULT_SPECIALS,
    TRAILING_PREFIX,
    ByteToken,
    Kind,
    Position,
    all_fallbacks,
    parse_token,
    render_token,
)

BBPE = "bbpe"
EXTERNAL_TEXT = "external_text"
META_PREFIX = "#!"
META_SUFFIX = ".meta"
FORMAT_VERSION = "1"

_SPECIAL_RE = re.compile(r"\[[^\[\]\s]+\]")


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    distinguish_leading: bool = True
    specials: tuple[str, ...] = DEFAULT_SPECIALS
    sentence_stops: tuple[str, ...] = DEFAULT_SENTENCE_STOPS
    source: str = BBPE
    _index: dict = field(default_factory=dict, compare=False, repr=False, hash=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "specials", tuple(self.specials))
        object.__setattr__(self, "sentence_stops", tuple(self.sentence_stops))
        index = self._index
        for i, tok in enumerate(self.tokens):
            if index.setdefault(tok, i) != i:
                raise ValueError(f"duplicate token {tok!r}")

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def __iter__(self):
        return iter(self.tokens)

    def id_of(self, token: str) -> int:
        return self._index[token]

    def get(self, token: str, default=None):
        return self._index.get(token, default)

    @property
    def is_bbpe(self) -> bool:
        return self.source == BBPE

    def byte_token(self, i: int) -> ByteToken:
        if not self.is_bbpe:
            raise TypeError("external vocabularies hold text tokens")
        return parse_token(self.tokens[i], self.specials, self.sentence_stops)

    def byte_tokens(self) -> list[ByteToken]:
        cached = self._cache.get("byte_tokens")
        if cached is None:
            cached = self._cache["byte_tokens"] = [self.byte_token(i) for i in range(len(self))]
        return cached

    def is_special(self, token: str) -> bool:
        return token in self.specials

    def learned_tokens(self) -> list[str]:
        """Multi-octet (bbpe) or non-special (external) entries."""
        if self.is_bbpe:
            return [render_token(t) for t in self.byte_tokens() if t.kind is Kind.LEARNED]
        return [t for t in self.tokens if t not in self.specials]

    def metadata(self) -> dict[str, str]:
        return {
            "format_version": FORMAT_VERSION,
            "source": self.source,
            "distinguish_leading": "true" if self.distinguish_leading else "false",
            "specials": " ".join(self.specials),
            "sentence_stops": " ".join(self.sentence_stops),
            "size": str(len(self)),
        }


def finalize(raw, cfg) -> Vocabulary:
    """Lay out specials, the single-octet fallbacks, sentence stops, then the
    learned tokens in merge-rank order."""
    fallbacks = [render_token(t) for t in all_fallbacks(cfg.distinguish_leading)]
    learned = []
    seen = set(fallbacks)
    for tok in raw.learned:
        if not cfg.distinguish_leading and tok.position is not Position.LEADING:
            raise ValueError("trailing token in a vocabulary without the position split")
        text = render_token(tok)
        if text not in seen:
            seen.add(text)
            learned.append(text)
    tokens = [*cfg.effective_specials, *fallbacks, *cfg.sentence_stops, *learned]
    if len(tokens) > cfg.vocab_size:
        raise VocabOverflow(f"{len(tokens)} tokens exceed vocab_size {cfg.vocab_size}")
    return Vocabulary(
        tuple(tokens), cfg.distinguish_leading, cfg.effective_specials,
        cfg.sentence_stops, BBPE,
    )


# -- file format ------------------------------------------------------------


def meta_path(path) -> str:
    return os.fspath(path) + META_SUFFIX


def save(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("".join(t + "\n" for t in vocab.tokens))
    meta = vocab.metadata()
    with open(meta_path(path), "w", encoding="utf-8", newline="\n") as f:
        f.write("".join(f"{META_PREFIX}{k} = {v}\n" for k, v in meta.items()))


def _parse_meta_line(path, lineno, line, meta):
    body = line[len(META_PREFIX):]
    key, sep, value = body.partition("=")
    if not sep:
        raise MalformedLine(path, lineno, "metadata line needs 'key = value'")
    meta[key.strip()] = value.strip()


def _read_lines(path):
    with open(path, encoding="utf-8", newline="") as f:
        data = f.read()
    if not data:
        return []
    if data.endswith("\n"):
        data = data[:-1]
    return data.split("\n")


def _read_meta(path) -> dict[str, str]:
    meta: dict[str, str] = {}
    mpath = meta_path(path)
    if os.path.exists(mpath):
        for lineno, line in enumerate(_read_lines(mpath), 1):
            if not line.strip():
                continue
            if not line.startswith(META_PREFIX):
                raise MalformedLine(mpath, lineno, "metadata lines start with '#!'")
            _parse_meta_line(mpath, lineno, line, meta)
    return meta


def _bool(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


def load(path) -> Vocabulary:
    """Load a bbpe vocabulary written by :func:`save`."""
    meta = _read_meta(path)
    lines = _read_lines(path)
    start = 0
    while start < len(lines) and lines[start].startswith(META_PREFIX):
        _parse_meta_line(path, start + 1, lines[start], meta)
        start += 1
    if meta.get("source", BBPE) != BBPE:
        raise MalformedLine(path, 0, f"source {meta['source']!r} is not a bbpe vocabulary")
    specials = tuple(meta["specials"].split()) if "specials" in meta else DEFAULT_SPECIALS
    stops = tuple(meta["sentence_stops"].split()) if "sentence_stops" in meta else DEFAULT_SENTENCE_STOPS
    distinguish = _bool(meta.get("distinguish_leading", "true"))

    tokens = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[start:], start + 1):
        if not line or "\r" in line:
            raise MalformedLine(path, lineno, "empty line or CR in vocabulary")
        try:
            tok = parse_token(line, specials, stops)
        except MalformedToken as exc:
            raise MalformedLine(path, lineno, str(exc)) from None
        if not distinguish and tok.trailing:
            raise MalformedLine(path, lineno, "trailing token without the position split")
        if line in seen:
            raise DuplicateToken(path, lineno, f"{line!r} already on line {seen[line]}")
        seen[line] = lineno
        tokens.append(line)
    if "size" in meta and int(meta["size"]) != len(tokens):
        raise MalformedLine(path, 0, f"metadata size {meta['size']} != {len(tokens)} tokens")
    return Vocabulary(tuple(tokens), distinguish, specials, stops, BBPE)


def load_external_text_vocab(path) -> Vocabulary:
    """Load a WordPiece-style text vocabulary (``##`` marks continuations)."""
    tokens = []
    seen: dict[str, int] = {}
    specials = []
    for lineno, line in enumerate(_read_lines(path), 1):
        line = line.removesuffix("\r")
        if not line or line == TRAILING_PREFIX:
            raise MalformedLine(path, lineno, "empty token")
        if line in seen:
            raise DuplicateToken(path, lineno, f"{line!r} already on line {seen[line]}")
        seen[line] = lineno
        tokens.append(line)
        if _SPECIAL_RE.fullmatch(line):
            specials.append(line)
    return Vocabulary(tuple(tokens), True, tuple(specials), (), EXTERNAL_TEXT)


def looks_like_bbpe(path) -> bool:
    if os.path.exists(meta_path(path)):
        return _read_meta(path).get("source", BBPE) == BBPE
    for line in _read_lines(path):
        if line.startswith(META_PREFIX):
            continue
        try:
            parse_token(line)
        except MalformedToken:
            return False
    return True


def load_any(path, fmt: str = "auto") -> Vocabulary:
    if fmt == "auto":
        fmt = BBPE if looks_like_bbpe(path) else "text"
    if fmt == BBPE:
        return load(path)
    if fmt in ("text", EXTERNAL_TEXT):
        return load_external_text_vocab(path)
    raise ValueError(f"unknown vocabulary format {fmt!r}")


def external_token_position(token: str) -> Position:
    return Position.TRAILING if token.startswith(TRAILING_PREFIX) and token != TRAILING_PREFIX else Position.LEADING
