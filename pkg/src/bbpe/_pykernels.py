"""Pure-Python kernels. Same contract as the compiled ``_kernels`` module."""

from __future__ import annotations

import heapq
from collections import defaultdict

BACKEND = "python"

N_BASE = 512  # ids 0..255 leading bytes, 256..511 trailing bytes


class MergeState:
    """Incremental BPE state over a weighted set of words.

    Symbols are integer ids; ``step`` selects the most frequent eligible
    adjacent pair (ties: smallest (left bytes, left position, right bytes,
    right position)), merges it everywhere and updates pair counts only
    for the words that contained it.
    """

    def __init__(self, words, counts, distinguish_leading=True,
                 max_token_bytes=16, min_pair_frequency=2):
        self.max_bytes = max_token_bytes
        self.min_freq = min_pair_frequency
        self.sym_bytes = [bytes([b]) for b in range(256)] * 2
        self.sym_pos = [0] * 256 + [1] * 256
        self.sym_index = {(b, p): i for i, (b, p) in enumerate(zip(self.sym_bytes, self.sym_pos))}
        trail = 256 if distinguish_leading else 0
        self.words = [[w[0]] + [trail + x for x in w[1:]] for w in words]
        self.counts = [int(c) for c in counts]

        self.pcount = defaultdict(int)
        self.pwords = defaultdict(set)
        for wi, sym in enumerate(self.words):
            c = self.counts[wi]
            for pair in zip(sym, sym[1:]):
                self.pcount[pair] += c
                self.pwords[pair].add(wi)
        self.heap = [self._entry(p, c) for p, c in self.pcount.items() if self._eligible(p)]
        heapq.heapify(self.heap)

    @property
    def n_symbols(self):
        return len(self.sym_bytes)

    def symbol_bytes(self, i):
        return self.sym_bytes[i]

    def symbol_position(self, i):
        return self.sym_pos[i]

    def word_symbols(self, wi):
        return list(self.words[wi])

    def symbol_counts(self):
        out = [0] * len(self.sym_bytes)
        for sym, c in zip(self.words, self.counts):
            for s in sym:
                out[s] += c
        return out

    def _eligible(self, pair):
        return len(self.sym_bytes[pair[0]]) + len(self.sym_bytes[pair[1]]) <= self.max_bytes

    def _entry(self, pair, count):
        a, b = pair
        sb, sp = self.sym_bytes, self.sym_pos
        return (-count, sb[a], sp[a], sb[b], sp[b], a, b)

    def step(self):
        heap = self.heap
        while heap:
            top = heap[0]
            count = -top[0]
            pair = (top[5], top[6])
            if self.pcount.get(pair, 0) != count:
                heapq.heappop(heap)
                continue
            if count < self.min_freq:
                return None
            heapq.heappop(heap)
            return self._merge(pair, count)
        return None

    def _merge(self, pair, count):
        a, b = pair
        merged = self.sym_bytes[a] + self.sym_bytes[b]
        pos = self.sym_pos[a]
        m = self.sym_index.get((merged, pos))
        is_new = m is None
        if is_new:
            m = len(self.sym_bytes)
            self.sym_bytes.append(merged)
            self.sym_pos.append(pos)
            self.sym_index[(merged, pos)] = m

        delta = defaultdict(int)
        pwords = self.pwords
        for wi in pwords.pop(pair, ()):
            sym = self.words[wi]
            n = len(sym)
            new = []
            i = 0
            while i < n:
                if i + 1 < n and sym[i] == a and sym[i + 1] == b:
                    new.append(m)
                    i += 2
                else:
                    new.append(sym[i])
                    i += 1
            if len(new) == n:
                continue
            c = self.counts[wi]
            for p in zip(sym, sym[1:]):
                delta[p] -= c
            for p in zip(new, new[1:]):
                delta[p] += c
                if p[0] == m or p[1] == m:
                    pwords[p].add(wi)
            self.words[wi] = new

        for p, d in delta.items():
            if not d:
                continue
            v = self.pcount.get(p, 0) + d
            if v == 0:
                self.pcount.pop(p, None)
                pwords.pop(p, None)
            else:
                self.pcount[p] = v
                if self._eligible(p):
                    heapq.heappush(self.heap, self._entry(p, v))
        return a, b, m, count, is_new


class GreedyMatcher:
    """Left-to-right longest-match over two token tables.

    The first token of a word is looked up among ``leading`` entries, all
    later ones among ``trailing`` entries. Tables map octets to token ids.
    """

    def __init__(self, leading, trailing):
        self.leading = dict(leading)
        self.trailing = dict(trailing)
        self.max_len = max((len(k) for k in (*self.leading, *self.trailing)), default=0)

    def match(self, word):
        out = []
        i = 0
        n = len(word)
        table = self.leading
        while i < n:
            for j in range(min(n, i + self.max_len), i, -1):
                tid = table.get(word[i:j])
                if tid is not None:
                    break
            else:
                raise ValueError(f"no token matches byte {word[i]:#04x} at offset {i}")
            out.append(tid)
            i = j
            table = self.trailing
        return out

    def count(self, words, weights, size):
        out = [0] * size
        for w, c in zip(words, weights):
            for tid in self.match(w):
                out[tid] += c
        return out
