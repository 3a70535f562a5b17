"""Vocabulary diagnostics: frequency profiles, per-script token histograms,
relative vocabulary differences and side-by-side tokenizations."""

from __future__ import annotations

import csv
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import regex

from .errors import MalformedToken
from .preprocess import PreprocessConfig, Preprocessor
from .tokens import TRAILING_PREFIX, SentenceStop, parse_token
from .tokenizer import Tokenizer, get_tokenizer

FRAGMENT = "fragment"
COMMON = "common"
OTHER = "other"

# label -> Unicode scripts; order breaks ties in the majority vote
DEFAULT_SCRIPT_MAP: dict[str, tuple[str, ...]] = {
    "latin": ("Latin",),
    "cyrillic": ("Cyrillic",),
    "greek": ("Greek",),
    "arabic": ("Arabic",),
    "hebrew": ("Hebrew",),
    "thai": ("Thai",),
    "devanagari": ("Devanagari",),
    "han": ("Han",),
    "kana": ("Hiragana", "Katakana"),
    "hangul": ("Hangul",),
}

_COMMON_RE = regex.compile(r"[\p{Script=Common}\p{Script=Inherited}]")


def parse_script_map(text: str) -> dict[str, tuple[str, ...]]:
    """``"latin=Latin; kana=Hiragana,Katakana"`` -> mapping."""
    out = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        label, sep, scripts = part.partition("=")
        if not sep:
            raise ValueError(f"script map entry needs 'label=Script,...': {part!r}")
        out[label.strip()] = tuple(s.strip() for s in scripts.split(",") if s.strip())
    return out


class ScriptClassifier:
    def __init__(self, script_map: Mapping[str, Iterable[str]] | None = None):
        self.script_map = {k: tuple(v) for k, v in (script_map or DEFAULT_SCRIPT_MAP).items()}
        self._order = {label: i for i, label in enumerate(self.script_map)}
        self._patterns = [
            (label, regex.compile("[" + "".join(rf"\p{{Script={s}}}" for s in scripts) + "]"))
            for label, scripts in self.script_map.items()
        ]
        self.char_label = lru_cache(maxsize=None)(self._char_label)

    def _char_label(self, ch: str) -> str:
        if _COMMON_RE.match(ch):
            return COMMON
        for label, pat in self._patterns:
            if pat.match(ch):
                return label
        return OTHER

    def text_label(self, text: str) -> str:
        votes = Counter(self.char_label(ch) for ch in text)
        votes.pop(COMMON, None)
        if not votes:
            return COMMON
        # majority, ties broken by script-map order (unknown scripts last)
        return min(votes, key=lambda lb: (-votes[lb], self._order.get(lb, len(self._order)), lb))

    def token_label(self, token: str, text: bool | None = None) -> str:
        """Label for a rendered token.

        ``text=None`` tries the hex rendering first and falls back to text.
        """
        if text is not True:
            try:
                tok = parse_token(token)
            except MalformedToken:
                if text is False:
                    raise
            else:
                if not tok.is_bytes:
                    return self.text_label(tok.text)
                try:
                    return self.text_label(tok.octets.decode("utf-8"))
                except UnicodeDecodeError:
                    return FRAGMENT
        if token.startswith(TRAILING_PREFIX) and token != TRAILING_PREFIX:
            token = token[len(TRAILING_PREFIX):]
        return self.text_label(token)


@lru_cache(maxsize=None)
def _default_classifier() -> ScriptClassifier:
    return ScriptClassifier()


def _classifier(script_map) -> ScriptClassifier:
    if script_map is None:
        return _default_classifier()
    if isinstance(script_map, ScriptClassifier):
        return script_map
    return ScriptClassifier(script_map)


def classify_token_language(token: str, script_map=None, text: bool | None = None) -> str:
    return _classifier(script_map).token_label(token, text)


# -- frequency profile ---------------------------------------------------------


@dataclass(frozen=True)
class FrequencyProfile:
    tokens: tuple[str, ...]
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def count(self, token: str) -> int:
        return self.counts[self.tokens.index(token)]

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.tokens, self.counts))

    def sorted_counts(self) -> list[int]:
        return sorted(self.counts, reverse=True)

    def rows(self) -> list[tuple[str, int]]:
        """(token, count) by descending count, ties in vocabulary order."""
        order = sorted(range(len(self.tokens)), key=lambda i: (-self.counts[i], i))
        return [(self.tokens[i], self.counts[i]) for i in order]

    def fraction_below(self, threshold: int) -> float:
        if not self.counts:
            return 0.0
        ascending = sorted(self.counts)
        return bisect_left(ascending, threshold) / len(ascending)

    @property
    def fraction_zero(self) -> float:
        return self.fraction_below(1)

    def subset(self, tokens: Iterable[str]) -> "FrequencyProfile":
        keep = set(tokens)
        pairs = [(t, c) for t, c in zip(self.tokens, self.counts) if t in keep]
        return FrequencyProfile(tuple(t for t, _ in pairs), tuple(c for _, c in pairs))

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["token", "count"])
            w.writerows(self.rows())


def wordpiece_word(word: str, index: Mapping[str, int], unk: str = "[UNK]",
                   max_chars: int = 100) -> list[str]:
    """Greedy longest-match-first WordPiece over a text vocabulary."""
    if len(word) > max_chars:
        return [unk]
    out = []
    start = 0
    while start < len(word):
        end = len(word)
        piece = None
        while start < end:
            sub = word[start:end]
            if start > 0:
                sub = TRAILING_PREFIX + sub
            if sub in index:
                piece = sub
                break
            end -= 1
        if piece is None:
            return [unk]
        out.append(piece)
        start = end
    return out


def wordpiece_tokenize(text: str, vocab, preprocess: PreprocessConfig | None = None) -> list[str]:
    pre = Preprocessor(preprocess or PreprocessConfig(sentence_stops=()))
    index = vocab._index
    out = []
    for word in pre.normalize(text).split(" "):
        if word:
            out.extend(wordpiece_word(word, index))
    return out


def _segment_counts(corpus: Iterable[str], pre: Preprocessor):
    words: Counter = Counter()
    stops: Counter = Counter()
    for line in corpus:
        for seg in pre.preprocess(line):
            if isinstance(seg, SentenceStop):
                stops[seg.char] += 1
            else:
                words[seg.octets] += 1
    return words, stops


def frequency_profile(vocab, corpus: Iterable[str], tokenizer: Tokenizer | None = None) -> FrequencyProfile:
    """Occurrences of every vocabulary entry when ``corpus`` is tokenized with it."""
    counts = [0] * len(vocab)
    if vocab.is_bbpe:
        tok = tokenizer or get_tokenizer(vocab)
        words, stops = _segment_counts(corpus, tok.preprocessor)
        for octets, c in words.items():
            for tid in tok.word_ids(octets):
                counts[tid] += c
        for ch, c in stops.items():
            counts[vocab.id_of(ch)] += c
    else:
        pre = Preprocessor(PreprocessConfig(sentence_stops=()))
        words: Counter = Counter()
        for line in corpus:
            words.update(w for w in pre.normalize(line).split(" ") if w)
        index = vocab._index
        for word, c in words.items():
            for piece in wordpiece_word(word, index):
                tid = index.get(piece)
                if tid is not None:
                    counts[tid] += c
    return FrequencyProfile(tuple(vocab.tokens), tuple(counts))


# -- language-wise comparison ----------------------------------------------------


def vocab_language_histogram(vocab, script_map=None) -> dict[str, int]:
    clf = _classifier(script_map)
    text = not vocab.is_bbpe
    hist: Counter = Counter()
    for tok in vocab.tokens:
        if tok in vocab.specials:
            continue
        hist[clf.token_label(tok, text or None)] += 1
    return dict(sorted(hist.items()))


def diff_histograms(hist_a: Mapping[str, int], hist_b: Mapping[str, int]) -> dict[str, float]:
    return {
        label: (hist_a[label] - hist_b.get(label, 0)) / hist_a[label]
        for label in sorted(hist_a)
        if hist_a[label] > 0
    }


def vocab_diff(vocab_a, vocab_b, script_map=None) -> dict[str, float]:
    """Per label, (A - B) / A; labels absent from A are omitted."""
    clf = _classifier(script_map)
    return diff_histograms(vocab_language_histogram(vocab_a, clf), vocab_language_histogram(vocab_b, clf))


def vocab_diff_rows(vocab_a, vocab_b, script_map=None) -> list[tuple[str, int, int, float | None]]:
    clf = _classifier(script_map)
    ha = vocab_language_histogram(vocab_a, clf)
    hb = vocab_language_histogram(vocab_b, clf)
    rel = diff_histograms(ha, hb)
    return [(lb, ha.get(lb, 0), hb.get(lb, 0), rel.get(lb)) for lb in sorted(set(ha) | set(hb))]


def write_diff_csv(rows, path) -> None:
    """``path`` may also be an open text stream."""
    if hasattr(path, "write"):
        _diff_rows_to(path, rows)
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        _diff_rows_to(f, rows)


def _diff_rows_to(f, rows):
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["label", "countA", "countB", "rel_diff"])
    for label, a, b, rel in rows:
        w.writerow([label, a, b, "" if rel is None else repr(rel)])


# -- case studies -------------------------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    tokens_a: list[str]
    tokens_b: list[str]

    @property
    def count_a(self) -> int:
        return len(self.tokens_a)

    @property
    def count_b(self) -> int:
        return len(self.tokens_b)


def tokenize_any(text: str, vocab) -> list[str]:
    if vocab.is_bbpe:
        return get_tokenizer(vocab).tokenize(text)
    return wordpiece_tokenize(text, vocab)


def tokenization_compare(text: str, vocab_a, vocab_b) -> Comparison:
    return Comparison(tokenize_any(text, vocab_a), tokenize_any(text, vocab_b))
