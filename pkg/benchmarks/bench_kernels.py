"""Compare the compiled and pure-Python kernels on the same workload.

    python3 benchmarks/bench_kernels.py --mb 1 --merges 3000
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

from bbpe import kernels  # noqa: E402
from bbpe.trainer import count_word_bytes  # noqa: E402
from corpus_gen import mixed_corpus  # noqa: E402


def bench_merges(backend, words, weights, n_merges):
    t0 = time.perf_counter()
    st = backend.MergeState(words, weights, True, 16, 2)
    t1 = time.perf_counter()
    done = 0
    while done < n_merges and st.step() is not None:
        done += 1
    return t1 - t0, time.perf_counter() - t1, done


def bench_match(backend, words, weights, rounds):
    st = backend.MergeState(words, weights, True, 16, 2)
    for _ in range(3000):
        if st.step() is None:
            break
    leading, trailing = {}, {}
    for i in range(st.n_symbols):
        (trailing if st.symbol_position(i) else leading)[st.symbol_bytes(i)] = i
    m = backend.GreedyMatcher(leading, trailing)
    t0 = time.perf_counter()
    for _ in range(rounds):
        m.count(words, weights, st.n_symbols)
    return (time.perf_counter() - t0) / rounds


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mb", type=float, default=1.0, help="corpus size in MiB")
    ap.add_argument("--merges", type=int, default=3000)
    ap.add_argument("--rounds", type=int, default=3)
    args = ap.parse_args()

    lines = mixed_corpus(int(args.mb * (1 << 20)), seed=0)
    counts = count_word_bytes(lines)
    words, weights = list(counts), list(counts.values())
    print(f"{len(lines)} lines, {len(words)} distinct words")
    print(f"{'backend':8} {'init s':>8} {'merge s':>8} {'merges':>7} {'match s':>8}")
    found = kernels.backends()
    results = {}
    for name in sorted(found):
        init, merge, done = bench_merges(found[name], words, weights, args.merges)
        match = bench_match(found[name], words, weights, args.rounds)
        results[name] = init + merge
        print(f"{name:8} {init:8.3f} {merge:8.3f} {done:7d} {match:8.3f}")
    if len(results) == 2:
        print(f"speed-up (init+merge): {results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
