"""Encode text to byte-level tokens and decode them back.

Words are segmented by greedy longest match over the vocabulary; the first
piece of a word is looked up among leading tokens, the rest among trailing
ones. The 512 single-octet fallbacks make this total, so no input ever maps
to ``[UNK]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .errors import InvalidUtf8, OrphanTrailing
from .preprocess import PreprocessConfig, Preprocessor
from .tokens import (
    DEFAULT_SENTENCE_STOPS,
    DEFAULT_SPECIALS,
    TRAILING_PREFIX,
    ByteToken,
    Position,
    SentenceStop,
    Word,
    parse_token,
)

_WORD_CACHE_SIZE = 1 << 16


@dataclass(frozen=True)
class TokenizerOptions:
    # Vocabulary trained without the position split; "##" added at tokenize time.
    wbl_mode: bool = False
    emit_ids: bool = False
    # Replay the merge list instead of longest match.
    merge_replay: bool = False


class Tokenizer:
    def __init__(self, vocab, options: TokenizerOptions | None = None, merges=None,
                 preprocess: PreprocessConfig | None = None):
        if not vocab.is_bbpe:
            raise TypeError("the byte-level tokenizer needs a bbpe vocabulary")
        self.vocab = vocab
        self.options = options or TokenizerOptions()
        if self.options.wbl_mode and vocab.distinguish_leading:
            raise ValueError("wbl_mode needs a vocabulary trained without the position split")
        if self.options.merge_replay and merges is None:
            raise ValueError("merge_replay needs the merge list")
        cfg = preprocess or PreprocessConfig(sentence_stops=vocab.sentence_stops)
        if tuple(cfg.sentence_stops) != tuple(vocab.sentence_stops):
            raise ValueError("preprocessor and vocabulary disagree on sentence stops")
        self.preprocessor = Preprocessor(cfg)

        leading, trailing = {}, {}
        self._tokens = vocab.byte_tokens()
        for i, tok in enumerate(self._tokens):
            if tok.is_bytes:
                (trailing if tok.trailing else leading)[tok.octets] = i
        if not vocab.distinguish_leading:
            trailing = leading
        self._leading, self._trailing = leading, trailing
        self.matcher = kernels.GreedyMatcher(leading, trailing)
        self._marker_id = vocab.get(TRAILING_PREFIX) if not vocab.distinguish_leading else None
        self._cache: dict[bytes, tuple[int, ...]] = {}

        self._ranks = self._parents = None
        if self.options.merge_replay:
            self._ranks, self._parents = {}, {}
            for rule in merges:
                key = (_key(rule.left), _key(rule.right))
                self._ranks.setdefault(key, (rule.rank, _key(rule.merged)))
                self._parents.setdefault(_key(rule.merged), key)

    # -- segmentation -------------------------------------------------------

    def word_ids(self, octets: bytes) -> tuple[int, ...]:
        ids = self._cache.get(octets)
        if ids is None:
            if self.options.merge_replay:
                ids = tuple(self._replay(octets))
            else:
                ids = tuple(self.matcher.match(octets))
            if len(self._cache) >= _WORD_CACHE_SIZE:
                self._cache.clear()
            self._cache[octets] = ids
        return ids

    def _replay(self, octets: bytes) -> list[int]:
        rest = Position.TRAILING if self.vocab.distinguish_leading else Position.LEADING
        syms = [(octets[:1], Position.LEADING)] + [(octets[i:i + 1], rest) for i in range(1, len(octets))]
        ranks = self._ranks
        while len(syms) > 1:
            best = None
            for pair in zip(syms, syms[1:]):
                hit = ranks.get(pair)
                if hit is not None and (best is None or hit[0] < best[1][0]):
                    best = (pair, hit)
            if best is None:
                break
            (left, right), (_, merged) = best
            out = []
            i = 0
            while i < len(syms):
                if i + 1 < len(syms) and syms[i] == left and syms[i + 1] == right:
                    out.append(merged)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            syms = out
        ids: list[int] = []
        for sym in syms:
            self._expand(sym, ids)
        return ids

    def _expand(self, sym, out):
        table = self._leading if sym[1] is Position.LEADING else self._trailing
        tid = table.get(sym[0])
        if tid is not None:
            out.append(tid)
            return
        # pruned intermediate: split along the rule that created it
        left, right = self._parents[sym]
        self._expand(left, out)
        self._expand(right, out)

    def tokenize_word(self, word) -> list[ByteToken]:
        octets = word.octets if isinstance(word, Word) else bytes(word)
        return [self._tokens[i] for i in self.word_ids(octets)]

    # -- text level ------------------------------------------------------------

    def _segment_ids(self, raw: str) -> Iterable[tuple[int, bool]]:
        """(token id, continues a word) for every emitted token."""
        vocab = self.vocab
        for seg in self.preprocessor.preprocess(raw):
            if isinstance(seg, SentenceStop):
                yield vocab.id_of(seg.char), False
            else:
                for j, tid in enumerate(self.word_ids(seg.octets)):
                    yield tid, j > 0

    def tokenize(self, raw: str) -> list[str]:
        toks = self.vocab.tokens
        wbl = self.options.wbl_mode
        return [
            TRAILING_PREFIX + toks[tid] if wbl and cont else toks[tid]
            for tid, cont in self._segment_ids(raw)
        ]

    def encode(self, raw: str) -> list[int]:
        if not self.options.wbl_mode:
            return [tid for tid, _ in self._segment_ids(raw)]
        out = []
        for tid, cont in self._segment_ids(raw):
            if cont:
                out.append(self._marker_id)
            out.append(tid)
        return out

    def __call__(self, raw: str):
        return self.encode(raw) if self.options.emit_ids else self.tokenize(raw)

    def ids_to_tokens(self, ids: Sequence[int]) -> list[str]:
        toks = self.vocab.tokens
        out = []
        pending = False
        for i in ids:
            if self._marker_id is not None and i == self._marker_id:
                pending = True
                continue
            out.append(TRAILING_PREFIX + toks[i] if pending else toks[i])
            pending = False
        return out

    def decode(self, ids: Sequence[int]) -> str:
        return detokenize(self.ids_to_tokens(ids), self.vocab.specials, self.vocab.sentence_stops)


def detokenize(tokens: Iterable[str], specials=DEFAULT_SPECIALS,
               sentence_stops=DEFAULT_SENTENCE_STOPS) -> str:
    """Rebuild normalized text: each leading token opens a word, "##" tokens
    extend it, words are UTF-8 decoded and joined by single spaces."""
    specials = tuple(s for s in specials if s != TRAILING_PREFIX)
    parts: list[str] = []
    current: bytearray | None = None

    def flush():
        try:
            parts.append(current.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise InvalidUtf8(f"word {bytes(current).hex().upper()} is not valid UTF-8: {exc.reason}") from None

    for text in tokens:
        tok = parse_token(text, specials, sentence_stops)
        if tok.is_bytes:
            if tok.trailing:
                if current is None:
                    raise OrphanTrailing(f"{text!r} does not continue a word")
                current += tok.octets
            else:
                if current is not None:
                    flush()
                current = bytearray(tok.octets)
        else:
            if current is not None:
                flush()
                current = None
            parts.append(tok.text)
    if current is not None:
        flush()
    return " ".join(parts)


def _key(tok: ByteToken):
    return (tok.octets, tok.position)


def get_tokenizer(vocab, options: TokenizerOptions | None = None) -> Tokenizer:
    """Tokenizer cached on the vocabulary (greedy mode only)."""
    options = options or TokenizerOptions()
    key = ("tokenizer", options)
    tok = vocab._cache.get(key)
    if tok is None:
        tok = vocab._cache[key] = Tokenizer(vocab, options)
    return tok


def tokenize_word(word, vocab) -> list[ByteToken]:
    return get_tokenizer(vocab).tokenize_word(word)


def tokenize(raw: str, vocab, opts: TokenizerOptions | None = None) -> list[str]:
    return get_tokenizer(vocab, opts).tokenize(raw)


def encode(raw: str, vocab, opts: TokenizerOptions | None = None) -> list[int]:
    return get_tokenizer(vocab, opts).encode(raw)


def decode(ids: Sequence[int], vocab, opts: TokenizerOptions | None = None) -> str:
    return get_tokenizer(vocab, opts).decode(ids)

