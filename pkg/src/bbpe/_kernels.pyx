# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: incremental merge loop and trie longest-match.

Observable behaviour is identical to ``bbpe._pykernels``.
"""

from libc.stdint cimport int32_t, int64_t, uint32_t, uint64_t
from libcpp.string cimport string
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from cython.operator cimport dereference as deref

BACKEND = "cython"


cdef struct Entry:
    int64_t count
    int32_t left
    int32_t right


cdef inline uint64_t pkey(int32_t a, int32_t b) nogil:
    return (<uint64_t><uint32_t>a << 32) | <uint32_t>b


cdef inline int32_t kleft(uint64_t k) nogil:
    return <int32_t>(k >> 32)


cdef inline int32_t kright(uint64_t k) nogil:
    return <int32_t>(k & 0xFFFFFFFFu)


cdef class MergeState:
    cdef vector[int32_t] buf
    cdef vector[int64_t] start
    cdef vector[int32_t] length
    cdef vector[int64_t] wcount
    cdef vector[int64_t] stamp
    cdef vector[string] sym_bytes
    cdef vector[int32_t] sym_pos
    cdef unordered_map[string, int32_t] sym_index
    cdef unordered_map[uint64_t, int64_t] pcount
    cdef unordered_map[uint64_t, vector[int32_t]] pwords
    cdef vector[Entry] heap
    cdef int64_t iteration
    cdef int max_bytes
    cdef int64_t min_freq

    def __init__(self, words, counts, distinguish_leading=True,
                 max_token_bytes=16, min_pair_frequency=2):
        cdef int32_t b, trail, wi
        cdef int64_t off = 0, c
        cdef string key
        cdef bytes w
        cdef const unsigned char *p
        cdef Py_ssize_t i
        self.max_bytes = max_token_bytes
        self.min_freq = min_pair_frequency
        self.iteration = 0
        for pos in range(2):
            for b in range(256):
                self._add_symbol(bytes([b]), pos)
        trail = 256 if distinguish_leading else 0
        counts = list(counts)
        for wi, w in enumerate(words):
            if not w:
                raise ValueError("empty word")
            self.start.push_back(off)
            self.length.push_back(len(w))
            self.wcount.push_back(counts[wi])
            self.stamp.push_back(-1)
            p = w
            self.buf.push_back(p[0])
            for i in range(1, len(w)):
                self.buf.push_back(trail + p[i])
            off += len(w)
        cdef int32_t n
        cdef int32_t *sym
        cdef uint64_t k
        for wi in range(<int32_t>self.start.size()):
            sym = &self.buf[self.start[wi]]
            n = self.length[wi]
            c = self.wcount[wi]
            for i in range(n - 1):
                k = pkey(sym[i], sym[i + 1])
                self.pcount[k] += c
                self.pwords[k].push_back(wi)
        for item in self.pcount:
            if self._eligible(kleft(item.first), kright(item.first)):
                self._push(item.second, kleft(item.first), kright(item.first))

    cdef int32_t _add_symbol(self, bytes data, int pos):
        cdef string key = bytes([pos]) + data
        cdef int32_t sid = <int32_t>self.sym_bytes.size()
        self.sym_bytes.push_back(data)
        self.sym_pos.push_back(pos)
        self.sym_index[key] = sid
        return sid

    @property
    def n_symbols(self):
        return self.sym_bytes.size()

    def symbol_bytes(self, int32_t i):
        cdef bytes out = self.sym_bytes[i]
        return out

    def symbol_position(self, int32_t i):
        return self.sym_pos[i]

    def word_symbols(self, int32_t wi):
        cdef int64_t s = self.start[wi]
        return [self.buf[s + j] for j in range(self.length[wi])]

    def symbol_counts(self):
        cdef vector[int64_t] out = vector[int64_t](self.sym_bytes.size(), 0)
        cdef int32_t wi, j
        cdef int64_t s
        for wi in range(<int32_t>self.start.size()):
            s = self.start[wi]
            for j in range(self.length[wi]):
                out[self.buf[s + j]] += self.wcount[wi]
        return list(out)

    cdef inline bint _eligible(self, int32_t a, int32_t b):
        return <int>(self.sym_bytes[a].size() + self.sym_bytes[b].size()) <= self.max_bytes

    cdef inline bint _better(self, Entry *x, Entry *y):
        cdef int c
        if x.count != y.count:
            return x.count > y.count
        if x.left != y.left:
            c = self.sym_bytes[x.left].compare(self.sym_bytes[y.left])
            if c != 0:
                return c < 0
            return self.sym_pos[x.left] < self.sym_pos[y.left]
        if x.right != y.right:
            c = self.sym_bytes[x.right].compare(self.sym_bytes[y.right])
            if c != 0:
                return c < 0
            return self.sym_pos[x.right] < self.sym_pos[y.right]
        return False

    cdef void _push(self, int64_t count, int32_t a, int32_t b):
        cdef Entry e
        e.count = count
        e.left = a
        e.right = b
        self.heap.push_back(e)
        cdef size_t i = self.heap.size() - 1, parent
        while i > 0:
            parent = (i - 1) >> 1
            if not self._better(&self.heap[i], &self.heap[parent]):
                break
            e = self.heap[i]
            self.heap[i] = self.heap[parent]
            self.heap[parent] = e
            i = parent

    cdef void _pop(self):
        cdef size_t n = self.heap.size() - 1, i = 0, l, r, best
        cdef Entry e
        self.heap[0] = self.heap[n]
        self.heap.pop_back()
        while True:
            l = 2 * i + 1
            r = l + 1
            best = i
            if l < n and self._better(&self.heap[l], &self.heap[best]):
                best = l
            if r < n and self._better(&self.heap[r], &self.heap[best]):
                best = r
            if best == i:
                break
            e = self.heap[i]
            self.heap[i] = self.heap[best]
            self.heap[best] = e
            i = best

    def step(self):
        cdef Entry top
        cdef uint64_t k
        cdef unordered_map[uint64_t, int64_t].iterator it
        cdef int64_t current
        while self.heap.size():
            top = self.heap[0]
            k = pkey(top.left, top.right)
            it = self.pcount.find(k)
            current = 0 if it == self.pcount.end() else deref(it).second
            if current != top.count:
                self._pop()
                continue
            if top.count < self.min_freq:
                return None
            self._pop()
            return self._merge(top.left, top.right, top.count)
        return None

    cdef tuple _merge(self, int32_t a, int32_t b, int64_t count):
        cdef string merged = self.sym_bytes[a] + self.sym_bytes[b]
        cdef int pos = self.sym_pos[a]
        cdef bytes merged_b = merged
        cdef string key = bytes([pos]) + merged_b
        cdef int32_t m
        cdef bint is_new
        cdef unordered_map[string, int32_t].iterator sit = self.sym_index.find(key)
        if sit == self.sym_index.end():
            is_new = True
            m = self._add_symbol(merged_b, pos)
        else:
            is_new = False
            m = deref(sit).second

        self.iteration += 1
        cdef uint64_t pk = pkey(a, b)
        cdef vector[int32_t] affected
        cdef unordered_map[uint64_t, vector[int32_t]].iterator wit = self.pwords.find(pk)
        if wit != self.pwords.end():
            affected.swap(deref(wit).second)
            self.pwords.erase(wit)

        cdef unordered_map[uint64_t, int64_t] delta
        cdef int32_t wi, i, j, n
        cdef int32_t *sym
        cdef int64_t c
        cdef uint64_t k
        cdef vector[int32_t] old
        for wi in affected:
            if self.stamp[wi] == self.iteration:
                continue
            self.stamp[wi] = self.iteration
            sym = &self.buf[self.start[wi]]
            n = self.length[wi]
            i = 0
            while i < n - 1:
                if sym[i] == a and sym[i + 1] == b:
                    break
                i += 1
            if i >= n - 1:
                continue
            c = self.wcount[wi]
            old.assign(sym, sym + n)
            for i in range(n - 1):
                delta[pkey(old[i], old[i + 1])] -= c
            # in-place rewrite; the word only shrinks
            i = 0
            j = 0
            while i < n:
                if i + 1 < n and old[i] == a and old[i + 1] == b:
                    sym[j] = m
                    i += 2
                else:
                    sym[j] = old[i]
                    i += 1
                j += 1
            self.length[wi] = j
            for i in range(j - 1):
                k = pkey(sym[i], sym[i + 1])
                delta[k] += c
                if sym[i] == m or sym[i + 1] == m:
                    self.pwords[k].push_back(wi)

        cdef int64_t v
        for item in delta:
            if item.second == 0:
                continue
            k = item.first
            v = self.pcount[k] + item.second
            if v == 0:
                self.pcount.erase(k)
                self.pwords.erase(k)
            else:
                self.pcount[k] = v
                if self._eligible(kleft(k), kright(k)):
                    self._push(v, kleft(k), kright(k))
        return a, b, m, count, is_new



cdef class GreedyMatcher:
    """Byte trie with two roots (leading, trailing); longest prefix wins."""

    cdef unordered_map[uint64_t, int32_t] edges
    cdef vector[int32_t] terminal
    cdef readonly dict leading
    cdef readonly dict trailing

    def __init__(self, leading, trailing):
        self.leading = dict(leading)
        self.trailing = dict(trailing)
        self.terminal.push_back(-1)
        self.terminal.push_back(-1)
        for root, table in ((0, self.leading), (1, self.trailing)):
            for data, tid in table.items():
                self._insert(root, data, tid)

    cdef void _insert(self, int32_t root, bytes data, int32_t tid):
        cdef int32_t node = root, child
        cdef unsigned char ch
        cdef uint64_t k
        cdef unordered_map[uint64_t, int32_t].iterator it
        for ch in data:
            k = (<uint64_t>node << 8) | ch
            it = self.edges.find(k)
            if it != self.edges.end():
                node = deref(it).second
            else:
                child = <int32_t>self.terminal.size()
                self.terminal.push_back(-1)
                self.edges[k] = child
                node = child
        self.terminal[node] = tid

    cdef int _match_into(self, const unsigned char *w, Py_ssize_t n, vector[int32_t] *out) except -1:
        cdef Py_ssize_t i = 0, j, best_end
        cdef int32_t node, best
        cdef uint64_t k
        cdef unordered_map[uint64_t, int32_t].iterator it
        while i < n:
            node = 0 if i == 0 else 1
            best = -1
            best_end = i
            j = i
            while j < n:
                k = (<uint64_t>node << 8) | w[j]
                it = self.edges.find(k)
                if it == self.edges.end():
                    break
                node = deref(it).second
                j += 1
                if self.terminal[node] >= 0:
                    best = self.terminal[node]
                    best_end = j
            if best < 0:
                raise ValueError(f"no token matches byte {w[i]:#04x} at offset {i}")
            out.push_back(best)
            i = best_end
        return 0

    def match(self, bytes word):
        cdef vector[int32_t] out
        self._match_into(word, len(word), &out)
        return list(out)

    def count(self, words, weights, Py_ssize_t size):
        cdef vector[int64_t] out = vector[int64_t](size, 0)
        cdef vector[int32_t] ids
        cdef bytes w
        cdef int64_t c
        cdef int32_t t
        for w, c in zip(words, weights):
            ids.clear()
            self._match_into(w, len(w), &ids)
            for t in ids:
                out[t] += c
        return list(out)
