"""Multilingual training text: line counts, upsampling and a seeded stream.

Low-resource languages are upsampled with exponential smoothing: a language
holding share ``p`` of all lines is sampled with probability proportional
to ``p ** alpha``. Repetition factors are that ratio rescaled so the largest
language is read exactly once.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class LanguageSource:
    tag: str
    paths: tuple[str, ...]


@dataclass(frozen=True)
class CorpusSpec:
    sources: tuple[LanguageSource, ...]
    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        tags = [s.tag for s in self.sources]
        if len(set(tags)) != len(tags):
            raise ValueError("duplicate language tag")

    @classmethod
    def from_paths(cls, paths, tag="default", **kw) -> "CorpusSpec":
        return cls((LanguageSource(tag, tuple(os.fspath(p) for p in paths)),), **kw)


@dataclass(frozen=True)
class LanguageStats:
    lines: int
    bytes: int


def read_lines(path) -> list[str]:
    """Lines of a UTF-8 file, with CRLF and lone CR read as LF."""
    with open(path, "rb") as f:
        data = f.read()
    text = data.decode("utf-8").replace("\r\n", "\n").replace("\r", "\n")
    if not text:
        return []
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n")


def measure(spec: CorpusSpec) -> dict[str, LanguageStats]:
    out = {}
    for src in spec.sources:
        lines = n_bytes = 0
        for path in src.paths:
            got = read_lines(path)
            lines += len(got)
            n_bytes += sum(len(x.encode("utf-8")) + 1 for x in got)
        out[src.tag] = LanguageStats(lines, n_bytes)
    return out


def upsample_plan(counts, alpha: float = 0.5) -> dict[str, float]:
    """Repetition factor per language; the least-boosted language gets 1.

    ``counts`` maps tag to line count (or ``LanguageStats``). Languages with
    no lines get factor 1 and contribute nothing.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    n = {t: (c.lines if isinstance(c, LanguageStats) else int(c)) for t, c in counts.items()}
    total = sum(n.values())
    live = {t: c / total for t, c in n.items() if c > 0}
    if not live:
        return {t: 1.0 for t in n}
    z = sum(p ** alpha for p in live.values())
    ratio = {t: (p ** alpha / z) / p for t, p in live.items()}
    low = min(ratio.values())
    return {t: (ratio[t] / low if t in ratio else 1.0) for t in n}


def _hash_unit(seed: int, *parts) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed).encode())
    for p in parts:
        h.update(b"\x00" + str(p).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def planned_copies(n_lines: int, factor: float, seed: int, tag: str) -> list[int]:
    """Copies of each line: floor(factor) for all, plus one extra for the
    round(n * frac) lines that rank first under a seeded hash."""
    base = math.floor(factor)
    frac = factor - base
    copies = [base] * n_lines
    extra = _round_half_up(n_lines * frac)
    if extra:
        ranked = sorted(range(n_lines), key=lambda i: (_hash_unit(seed, tag, i), i))
        for i in ranked[:extra]:
            copies[i] += 1
    return copies


def stream(spec: CorpusSpec, plan: dict[str, float] | None = None,
           shard: int = 0, num_shards: int = 1) -> Iterator[str]:
    """Every line repeated per ``plan``, in one seeded shuffled order.

    Consumers ``shard=i`` of ``num_shards`` get disjoint interleaved slices
    of the same order.
    """
    if not 0 <= shard < num_shards:
        raise ValueError("shard index out of range")
    if plan is None:
        plan = upsample_plan(measure(spec), spec.alpha)
    items = []
    for src in spec.sources:
        lines = [x for p in src.paths for x in read_lines(p)]
        copies = planned_copies(len(lines), plan.get(src.tag, 1.0), spec.seed, src.tag)
        for line, k in zip(lines, copies):
            items.extend([line] * k)
    random.Random(spec.seed).shuffle(items)
    yield from items[shard::num_shards]


def expected_total(counts, plan: dict[str, float]) -> int:
    n = {t: (c.lines if isinstance(c, LanguageStats) else int(c)) for t, c in counts.items()}
    return sum(n[t] * math.floor(plan[t]) + _round_half_up(n[t] * (plan[t] - math.floor(plan[t]))) for t in n)

