import random
import warnings
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from bbpe import kernels
from bbpe.errors import ConfigError, EmptyCorpus, MalformedLine
from bbpe.tokens import ByteToken, Position, render_token
from bbpe.trainer import (
    MergeRule,
    MergeTrainer,
    TrainerConfig,
    apply_merge,
    count_word_bytes,
    count_words,
    greedy_frequencies,
    merge_pair,
    pair_counts,
    read_merges,
    select_pair,
    train,
    train_from_counts,
    write_merges,
)
from bbpe.tokens import all_fallbacks

from oracle import naive_bpe

L, T = Position.LEADING, Position.TRAILING


def tok(s, pos=T):
    return ByteToken.of(s.encode(), pos)


def R(t):
    return [render_token(x) for x in t]


def test_count_words_examples():
    table = count_words(["ab ab ab abc"])
    assert {tuple(R(k)): v for k, v in table.items()} == {("61", "##62"): 3, ("61", "##62", "##63"): 1}
    assert count_words([]) == {}
    table = count_words(["你 你"])
    assert {tuple(R(k)): v for k, v in table.items()} == {("E4", "##BD", "##A0"): 2}


def test_count_words_skips_stops():
    table = count_words(["a. a!"])
    assert sum(table.values()) == 2


def test_pair_counts_repeated_word():
    a, b, c = tok("A"), tok("B"), tok("C")
    word = (a, b, a, b, a, b, c, a, b, c)
    counts = pair_counts({word: 1})
    assert counts == {(a, b): 4, (b, a): 2, (b, c): 2, (c, a): 1}
    assert select_pair(counts) == (a, b)
    assert pair_counts({}) == {}


def test_pair_counts_weighted():
    a, b, c = tok("a", L), tok("b"), tok("c")
    counts = pair_counts({(a, b): 3, (a, b, c): 1})
    assert counts == {(a, b): 4, (b, c): 1}


def test_select_pair_tie_break_and_threshold():
    z, c = tok("Z"), tok("C")
    assert select_pair({(z, c): 2, (z, z): 2}) == (z, c)
    x, y = tok("X"), tok("Y")
    assert select_pair({(x, y): 1}) is None
    assert select_pair({(x, y): 1}, TrainerConfig(600, min_pair_frequency=1)) == (x, y)
    # leading sorts before trailing on equal octets
    xl = tok("X", L)
    assert select_pair({(x, y): 3, (xl, y): 3}) == (xl, y)


def test_select_pair_respects_max_bytes():
    big = ByteToken.of(b"a" * 10, L)
    cfg = TrainerConfig(600, max_token_bytes=12)
    small = ByteToken.of(b"bbb", T)
    assert select_pair({(big, small): 9, (small, small): 2}, cfg) == (small, small)
    assert select_pair({(big, big): 9}, cfg) is None


def test_apply_merge_examples():
    z, c = tok("Z"), tok("C")
    y = merge_pair(z, c)
    assert apply_merge({(z, z, z, c, z, c): 1}, (z, c)) == {(z, z, y, y): 1}
    a, b = tok("a", L), tok("b")
    ab = merge_pair(a, b)
    assert R([ab]) == ["6162"]
    assert apply_merge({(a, b): 3}, MergeRule(a, b, ab, 3, 0)) == {(ab,): 3}
    table = {(a, c): 2}
    assert apply_merge(table, (a, b)) == table


def test_apply_merge_overlap_is_left_to_right():
    a = tok("a")
    aa = merge_pair(a, a)
    assert apply_merge({(a, a, a): 1}, (a, a)) == {(aa, a): 1}
    assert apply_merge({(a, a, a, a): 1}, (a, a)) == {(aa, aa): 1}


def test_train_small_examples():
    cfg = TrainerConfig(600, min_pair_frequency=1, prune=False)
    res = train(["ab ab ab abc"], cfg)
    assert [(render_token(r.left), render_token(r.right)) for r in res.merges] == [("61", "##62"), ("6162", "##63")]
    assert R(res.learned) == ["6162", "616263"]


def test_train_first_merge_abab():
    cfg = TrainerConfig(600, min_pair_frequency=1, prune=False)
    res = train(["ABABABCABC"], cfg)
    first = res.merges[0]
    # with the position split the first "AB" starts the word, so the
    # trailing pair "##41 ##42" wins with three occurrences
    assert (render_token(first.left), render_token(first.right), first.count_at_merge) == ("##41", "##42", 3)
    wwb = train(["ABABABCABC"], TrainerConfig(600, min_pair_frequency=1, prune=False, distinguish_leading=False))
    f = wwb.merges[0]
    assert (f.left.octets, f.right.octets, f.count_at_merge) == (b"A", b"B", 4)


def test_train_empty_corpus_warns():
    with pytest.warns(EmptyCorpus):
        res = train([], TrainerConfig(600))
    assert res.merges == [] and res.learned == []


@pytest.mark.parametrize("kw", [
    dict(vocab_size=100),
    dict(vocab_size=517),
    dict(vocab_size=600, min_pair_frequency=0),
    dict(vocab_size=600, max_token_bytes=1),
    dict(vocab_size=600, threads=0),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        TrainerConfig(**kw)


def test_config_sizes():
    cfg = TrainerConfig(600)
    assert cfg.base_size == 5 + 512 + 6 and cfg.learned_budget == 600 - 523
    wwb = TrainerConfig(600, distinguish_leading=False)
    assert wwb.effective_specials[-1] == "##" and wwb.base_size == 6 + 256 + 6


def _random_words(rng, max_words=50, alphabet=8):
    letters = bytes(rng.sample(range(0x21, 0x7F), alphabet))
    words = Counter()
    for _ in range(rng.randint(1, max_words)):
        n = rng.randint(1, 8)
        words[bytes(rng.choice(letters) for _ in range(n))] += rng.randint(1, 3)
    return dict(words)


def _state_rules(backend, words, distinguish, min_freq, max_bytes):
    ws = list(words)
    st = backend.MergeState(ws, [words[w] for w in ws], distinguish, max_bytes, min_freq)
    out = []
    while True:
        step = st.step()
        if step is None:
            return out, st
        a, b, m, count, _ = step
        out.append((
            (st.symbol_bytes(a), st.symbol_position(a)),
            (st.symbol_bytes(b), st.symbol_position(b)),
            count,
        ))


@pytest.mark.parametrize("name", sorted(kernels.backends()))
@pytest.mark.parametrize("distinguish", [True, False])
def test_kernel_matches_oracle(name, distinguish):
    backend = kernels.backends()[name]
    rng = random.Random(f"{name}{distinguish}")
    for _ in range(60):
        words = _random_words(rng)
        min_freq = rng.choice([1, 2, 3])
        max_bytes = rng.choice([2, 3, 16])
        expected, final = naive_bpe(words, distinguish, min_freq, max_bytes)
        got, st = _state_rules(backend, words, distinguish, min_freq, max_bytes)
        assert got == expected
        # final symbol totals agree with the replayed table
        want = Counter()
        for syms, c in final.items():
            for s in syms:
                want[s] += c
        have = {
            (st.symbol_bytes(i), st.symbol_position(i)): c
            for i, c in enumerate(st.symbol_counts()) if c
        }
        assert have == dict(want)


def test_backends_agree_on_larger_input():
    found = kernels.backends()
    if len(found) < 2:
        pytest.skip("compiled kernels not built")
    rng = random.Random(7)
    words = _random_words(rng, max_words=2000, alphabet=20)
    a, _ = _state_rules(found["python"], words, True, 2, 16)
    b, _ = _state_rules(found["cython"], words, True, 2, 16)
    assert a == b


def test_is_new_flags_first_appearance():
    rng = random.Random(2)
    for _ in range(50):
        words = _random_words(rng, alphabet=3)
        st = kernels.MergeState(list(words), list(words.values()), rng.random() < 0.5, 4, 1)
        seen = set()
        while (r := st.step()) is not None:
            key = (st.symbol_bytes(r[2]), st.symbol_position(r[2]))
            assert r[4] == (key not in seen)
            seen.add(key)


def test_merge_trainer_rules_upto():
    words = {b"abcd": 10, b"abce": 4}
    tr = MergeTrainer(words, TrainerConfig(600, min_pair_frequency=1))
    tr.advance(2)
    assert len(tr.learned) == 2
    assert tr.rules_upto(1)[-1].merged == tr.learned[0]
    assert tr.rules_upto(0) == []


def test_count_word_bytes_threads_independent():
    rng = random.Random(3)
    lines = [" ".join(rng.choice(["ab", "cd", "中文", "x!"]) for _ in range(5)) for _ in range(400)]
    one = count_word_bytes(lines, threads=1)
    four = count_word_bytes(lines, threads=4)
    assert one == four and list(one) == sorted(one)


def test_greedy_frequencies_simple():
    fb = all_fallbacks()
    ab = ByteToken.of(b"ab", L)
    freq = greedy_frequencies(fb + [ab], {b"ab": 3, b"abb": 1})
    assert freq[ab] == 4 and freq[ByteToken.of(b"b", T)] == 1


def test_prune_keeps_only_frequent_tokens():
    rng = random.Random(11)
    lines = [" ".join(rng.choice(["alpha", "alphabet", "beta", "gamma", "gam"]) for _ in range(6)) for _ in range(200)]
    cfg = TrainerConfig(560, min_pair_frequency=5)
    res = train(lines, cfg)
    assert len(res.learned) <= cfg.learned_budget
    assert all(c >= 5 for c in res.counts.values())
    rendered = R(res.learned)
    assert len(set(rendered)) == len(rendered)


def test_prune_fills_budget_when_possible():
    rng = random.Random(5)
    vocab = ["".join(rng.choice("abcdefghij") for _ in range(rng.randint(2, 7))) for _ in range(300)]
    lines = [" ".join(rng.choices(vocab, k=10)) for _ in range(2000)]
    cfg = TrainerConfig(700, min_pair_frequency=3)
    res = train(lines, cfg)
    assert len(res.learned) == cfg.learned_budget


def test_merges_file_roundtrip(tmp_path):
    res = train(["hello hello world wordy"], TrainerConfig(600, min_pair_frequency=1, prune=False))
    path = tmp_path / "m.txt"
    write_merges(res.merges, path)
    text = path.read_text(encoding="utf-8")
    assert text.endswith("\n") and "\r" not in text
    assert text.splitlines()[0].split("\t")[0] == "0"
    assert read_merges(path) == res.merges


@pytest.mark.parametrize("content", ["0\t61\n", "1\t61\t##62\t3\n", "0\t61\t##6Z\t3\n", "x\t61\t##62\t3\n"])
def test_merges_file_rejects(tmp_path, content):
    path = tmp_path / "m.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(MalformedLine):
        read_merges(path)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.text(alphabet="abcab c中", max_size=12), max_size=15))
def test_train_deterministic_and_prefix_closed(lines):
    cfg = TrainerConfig(560, min_pair_frequency=1, prune=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptyCorpus)
        a = train(lines, cfg)
        b = train(list(reversed(lines)), cfg)
    assert a.merges == b.merges
    # every merged token is built from tokens that exist at that point
    have = {(t.octets, t.position) for t in all_fallbacks()}
    for r in a.merges:
        assert (r.left.octets, r.left.position) in have and (r.right.octets, r.right.position) in have
        have.add((r.merged.octets, r.merged.position))
