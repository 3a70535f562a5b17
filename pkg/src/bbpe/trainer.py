"""Byte-level BPE training.

``count_words``, ``pair_counts``, ``select_pair`` and ``apply_merge`` are the
plain, full-recount building blocks. ``MergeTrainer`` drives the incremental
kernel, which must produce the same merge sequence.
"""

from __future__ import annotations

import logging
import warnings
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import kernels
from .errors import ConfigError, EmptyCorpus, MalformedLine
from .preprocess import PreprocessConfig, Preprocessor
from .tokens import (
    DEFAULT_SPECIALS,
    TRAILING_PREFIX,
    ByteToken,
    Position,
    PreprocessedText,
    Word,
    all_fallbacks,
    parse_token,
    render_token,
)

log = logging.getLogger(__name__)

WordTable = dict  # tuple[ByteToken, ...] -> int
Pair = tuple  # (ByteToken, ByteToken)


@dataclass(frozen=True)
class TrainerConfig:
    vocab_size: int
    min_pair_frequency: int = 2
    distinguish_leading: bool = True
    max_token_bytes: int = 16
    specials: tuple[str, ...] = DEFAULT_SPECIALS
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    # drop learned tokens whose corpus frequency ends below min_pair_frequency
    prune: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.min_pair_frequency < 1:
            raise ConfigError("min_pair_frequency must be >= 1")
        if self.max_token_bytes < 2:
            raise ConfigError("max_token_bytes must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        floor = (512 if self.distinguish_leading else 256) + len(self.effective_specials)
        if self.vocab_size <= floor or self.vocab_size < self.base_size:
            raise ConfigError(
                f"vocab_size {self.vocab_size} leaves no room above the "
                f"{self.base_size} reserved entries"
            )

    @property
    def sentence_stops(self) -> tuple[str, ...]:
        return self.preprocess.sentence_stops

    @property
    def effective_specials(self) -> tuple[str, ...]:
        # Without the position split, "##" is a standalone marker token (WBL).
        if self.distinguish_leading or TRAILING_PREFIX in self.specials:
            return tuple(self.specials)
        return tuple(self.specials) + (TRAILING_PREFIX,)

    @property
    def base_size(self) -> int:
        n_fallback = 512 if self.distinguish_leading else 256
        return len(self.effective_specials) + n_fallback + len(self.sentence_stops)

    @property
    def learned_budget(self) -> int:
        return self.vocab_size - self.base_size


@dataclass(frozen=True)
class MergeRule:
    left: ByteToken
    right: ByteToken
    merged: ByteToken
    count_at_merge: int
    rank: int


@dataclass
class TrainResult:
    merges: list[MergeRule]
    learned: list[ByteToken]
    counts: dict[ByteToken, int]
    word_counts: dict[bytes, int] = field(default_factory=dict, repr=False)


# -- counting -------------------------------------------------------------


def _segments(item, preprocessor):
    if isinstance(item, PreprocessedText):
        return item.segments
    return preprocessor.preprocess(item).segments


def count_words(corpus: Iterable, distinguish_leading: bool = True,
                preprocessor: Preprocessor | None = None) -> WordTable:
    """Distinct words as initial single-octet symbol sequences, with counts.

    ``corpus`` items are raw strings or ``PreprocessedText``. Sentence stops
    are not words and are skipped.
    """
    pre = preprocessor or Preprocessor()
    counts: Counter = Counter()
    for item in corpus:
        for seg in _segments(item, pre):
            if isinstance(seg, Word):
                counts[seg.octets] += 1
    return {
        Word(w).symbols(distinguish_leading): c
        for w, c in sorted(counts.items())
    }


def _count_shard(args):
    lines, config = args
    pre = Preprocessor(config)
    counts: Counter = Counter()
    for line in lines:
        counts.update(pre.word_bytes(line))
    return counts


def count_word_bytes(lines: Iterable[str], config: PreprocessConfig | None = None,
                     threads: int = 1) -> dict[bytes, int]:
    """Occurrences of each distinct word (as octets), sorted by octets.

    With ``threads > 1`` the lines are split into contiguous shards counted
    in worker processes; the merged result does not depend on the split.
    """
    config = config or PreprocessConfig()
    lines = list(lines)
    if threads > 1 and len(lines) >= 2 * threads:
        step = -(-len(lines) // threads)
        shards = [(lines[i:i + step], config) for i in range(0, len(lines), step)]
        total: Counter = Counter()
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for part in pool.map(_count_shard, shards):
                total.update(part)
    else:
        total = _count_shard((lines, config))
    return dict(sorted(total.items()))


def pair_counts(table: Mapping) -> dict:
    """Count every adjacent symbol position, weighted by word count."""
    out: Counter = Counter()
    for symbols, c in table.items():
        for pair in zip(symbols, symbols[1:]):
            out[pair] += c
    return dict(out)


def _tie_key(pair):
    left, right = pair
    return (left.octets, left.position, right.octets, right.position)


def select_pair(counts: Mapping, cfg: TrainerConfig | None = None):
    """Most frequent eligible pair, or None below ``min_pair_frequency``.

    Ties go to the smallest (left octets, left position, right octets,
    right position); pairs whose fusion would exceed ``max_token_bytes``
    are never selected.
    """
    min_freq = cfg.min_pair_frequency if cfg else 2
    max_bytes = cfg.max_token_bytes if cfg else 16
    best = None
    best_key = None
    for pair, c in counts.items():
        if len(pair[0].octets) + len(pair[1].octets) > max_bytes:
            continue
        key = (-c, _tie_key(pair))
        if best_key is None or key < best_key:
            best, best_key = pair, key
    if best is None or -best_key[0] < min_freq:
        return None
    return best


def merge_pair(left: ByteToken, right: ByteToken) -> ByteToken:
    return ByteToken.of(left.octets + right.octets, left.position)


def apply_merge(table: Mapping, rule) -> WordTable:
    """Replace (left, right) left-to-right, non-overlapping, in every word."""
    if isinstance(rule, MergeRule):
        left, right, merged = rule.left, rule.right, rule.merged
    else:
        left, right = rule
        merged = merge_pair(left, right)
    out: dict = {}
    for symbols, c in table.items():
        new = []
        i = 0
        n = len(symbols)
        while i < n:
            if i + 1 < n and symbols[i] == left and symbols[i + 1] == right:
                new.append(merged)
                i += 2
            else:
                new.append(symbols[i])
                i += 1
        key = tuple(new)
        out[key] = out.get(key, 0) + c
    return out


# -- incremental training ---------------------------------------------------


class MergeTrainer:
    """Resumable merge loop over a fixed word-count table."""

    def __init__(self, word_counts: Mapping[bytes, int], cfg: TrainerConfig):
        self.cfg = cfg
        self.words = list(word_counts)
        self.weights = [word_counts[w] for w in self.words]
        self.state = kernels.MergeState(
            self.words, self.weights, cfg.distinguish_leading,
            cfg.max_token_bytes, cfg.min_pair_frequency,
        )
        self.rules: list[MergeRule] = []
        self.learned: list[ByteToken] = []
        self._created_at: list[int] = []
        self._tokens: dict[int, ByteToken] = {}
        self.exhausted = False

    def token(self, sid: int) -> ByteToken:
        tok = self._tokens.get(sid)
        if tok is None:
            tok = ByteToken.of(self.state.symbol_bytes(sid), Position(self.state.symbol_position(sid)))
            self._tokens[sid] = tok
        return tok

    def step(self) -> MergeRule | None:
        if self.exhausted:
            return None
        res = self.state.step()
        if res is None:
            self.exhausted = True
            return None
        a, b, m, count, is_new = res
        rule = MergeRule(self.token(a), self.token(b), self.token(m), int(count), len(self.rules))
        self.rules.append(rule)
        if is_new:
            self.learned.append(rule.merged)
            self._created_at.append(rule.rank)
        return rule

    def advance(self, n_learned: int) -> None:
        """Run until ``n_learned`` new tokens exist or no pair qualifies."""
        while len(self.learned) < n_learned and self.step() is not None:
            pass

    def rules_upto(self, n_learned: int) -> list[MergeRule]:
        if n_learned <= 0:
            return []
        return self.rules[: self._created_at[n_learned - 1] + 1]

    def symbol_counts(self) -> dict[ByteToken, int]:
        counts = self.state.symbol_counts()
        return {self.token(i): c for i, c in enumerate(counts) if c}


def _matcher_for(tokens: list[ByteToken], distinguish_leading: bool):
    leading, trailing = {}, {}
    for i, t in enumerate(tokens):
        if t.position is Position.LEADING:
            leading[t.octets] = i
        else:
            trailing[t.octets] = i
    if not distinguish_leading:
        trailing = leading
    return kernels.GreedyMatcher(leading, trailing)


def greedy_frequencies(tokens: list[ByteToken], word_counts: Mapping[bytes, int],
                       distinguish_leading: bool = True) -> dict[ByteToken, int]:
    """Frequency of each token when every word is split by longest match.

    ``tokens`` should include the single-octet fallbacks so that every word
    has a segmentation.
    """
    matcher = _matcher_for(tokens, distinguish_leading)
    counts = matcher.count(list(word_counts), list(word_counts.values()), len(tokens))
    return dict(zip(tokens, counts))


def _prune(candidates, fallbacks, word_counts, cfg):
    kept = list(candidates)
    while True:
        freq = greedy_frequencies(fallbacks + kept, word_counts, cfg.distinguish_leading)
        survivors = [t for t in kept if freq[t] >= cfg.min_pair_frequency]
        if len(survivors) == len(kept):
            return kept, freq
        kept = survivors


def train(corpus: Iterable, cfg: TrainerConfig) -> TrainResult:
    """Learn merges from ``corpus`` (raw lines or PreprocessedText items)."""
    corpus = list(corpus)
    if corpus and all(isinstance(x, str) for x in corpus):
        word_counts = count_word_bytes(corpus, cfg.preprocess, cfg.threads)
    else:
        table = count_words(corpus, True, Preprocessor(cfg.preprocess))
        word_counts = {b"".join(t.octets for t in k): c for k, c in table.items()}
    return train_from_counts(word_counts, cfg)


def train_from_counts(word_counts: Mapping[bytes, int], cfg: TrainerConfig) -> TrainResult:
    word_counts = dict(sorted(word_counts.items()))
    if not word_counts:
        warnings.warn("empty corpus: vocabulary holds fallbacks only", EmptyCorpus, stacklevel=2)
    budget = cfg.learned_budget
    fallbacks = all_fallbacks(cfg.distinguish_leading)
    trainer = MergeTrainer(word_counts, cfg)

    if not cfg.prune:
        trainer.advance(budget)
        learned = trainer.learned[:budget]
        freq = greedy_frequencies(fallbacks + learned, word_counts, cfg.distinguish_leading)
        return TrainResult(trainer.rules_upto(len(learned)), learned,
                           {t: freq[t] for t in learned}, word_counts)

    # Pruning can shrink the vocabulary, so keep pulling merge candidates
    # until the surviving set fills the budget or the corpus is exhausted.
    k = budget
    seen: dict[int, tuple] = {}
    while k not in seen:
        trainer.advance(k)
        k = min(k, len(trainer.learned))
        if k in seen:
            break
        kept, freq = _prune(trainer.learned[:k], fallbacks, word_counts, cfg)
        seen[k] = (kept, freq)
        log.debug("candidates=%d kept=%d budget=%d", k, len(kept), budget)
        if len(kept) == budget or (len(kept) < budget and trainer.exhausted and k == len(trainer.learned)):
            break
        k = k + (budget - len(kept)) if len(kept) < budget else max(0, k - (len(kept) - budget))
    fits = [(len(v[0]), -kk, kk) for kk, v in seen.items() if len(v[0]) <= budget]
    _, _, k = max(fits)
    kept, freq = seen[k]
    return TrainResult(trainer.rules_upto(k), kept, {t: freq[t] for t in kept}, word_counts)


# -- merges file ------------------------------------------------------------


def write_merges(rules: list[MergeRule], path) -> None:
    lines = [
        f"{r.rank}\t{render_token(r.left)}\t{render_token(r.right)}\t{r.count_at_merge}"
        for r in rules
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("".join(line + "\n" for line in lines))


def read_merges(path, distinguish_leading: bool = True) -> list[MergeRule]:
    rules = []
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise MalformedLine(path, lineno, "expected RANK<TAB>LEFT<TAB>RIGHT<TAB>COUNT")
            try:
                rank, count = int(parts[0]), int(parts[3])
                left, right = parse_token(parts[1], (), ()), parse_token(parts[2], (), ())
            except ValueError as exc:
                raise MalformedLine(path, lineno, str(exc)) from None
            if rank != len(rules):
                raise MalformedLine(path, lineno, f"rank {rank} out of order")
            rules.append(MergeRule(left, right, merge_pair(left, right), count, rank))
    return rules
