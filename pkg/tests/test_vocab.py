import pytest

from bbpe.errors import DuplicateToken, MalformedLine, VocabOverflow
from bbpe.tokens import ByteToken, Kind, Position
from bbpe.trainer import TrainerConfig, TrainResult, train
from bbpe.vocab import (
    Vocabulary,
    finalize,
    load,
    load_any,
    load_external_text_vocab,
    looks_like_bbpe,
    meta_path,
    save,
)

from conftest import fallback_vocab


def test_fallback_layout():
    v = fallback_vocab()
    assert v.tokens[:5] == ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
    assert v.tokens[5] == "00" and v.tokens[5 + 255] == "FF"
    assert v.tokens[261] == "##00" and v.tokens[516] == "##FF"
    assert v.tokens[517:] == (".", "!", "?", "。", "！", "？")
    assert "FF" in v and "##FF" in v
    assert v.learned_tokens() == []


def test_learned_trailing_rendering():
    cfg = TrainerConfig(600)
    raw = TrainResult([], [ByteToken.of(b"\xa9\x92", Position.TRAILING)], {})
    v = finalize(raw, cfg)
    assert v.tokens[-1] == "##A992"
    assert v.byte_token(len(v) - 1).kind is Kind.LEARNED


def test_finalize_overflow():
    cfg = TrainerConfig(524)
    raw = TrainResult([], [ByteToken.of(b"ab"), ByteToken.of(b"cd")], {})
    with pytest.raises(VocabOverflow):
        finalize(raw, cfg)


def test_wwb_layout():
    v = fallback_vocab(False)
    assert v.specials[-1] == "##"
    assert sum(1 for t in v.byte_tokens() if t.is_bytes) == 256
    assert not any(t.startswith("##") and t != "##" for t in v.tokens)


def test_duplicates_rejected_in_memory():
    with pytest.raises(ValueError):
        Vocabulary(("61", "61"))


def test_save_load_roundtrip(tmp_path):
    res = train(["hello world hello there"] * 3, TrainerConfig(560))
    v = finalize(res, TrainerConfig(560))
    p = tmp_path / "v.txt"
    save(v, p)
    data = p.read_bytes()
    assert data.endswith(b"\n") and not data.endswith(b"\n\n") and b"\r" not in data
    assert len(data.decode().splitlines()) == len(v)
    back = load(p)
    assert back == v
    save(back, tmp_path / "w.txt")
    assert (tmp_path / "w.txt").read_bytes() == data
    assert (tmp_path / "w.txt.meta").read_bytes() == (tmp_path / "v.txt.meta").read_bytes()


def test_line_index_is_id(tmp_path):
    v = finalize(TrainResult([], [ByteToken.of(b"\xe8\xa9\x92")], {}), TrainerConfig(600))
    p = tmp_path / "v.txt"
    save(v, p)
    lines = p.read_text(encoding="utf-8").splitlines()
    k = lines.index("E8A992")
    assert load(p).id_of("E8A992") == k


def test_inline_header_accepted(tmp_path):
    v = fallback_vocab()
    p = tmp_path / "v.txt"
    header = "".join(f"#!{k} = {val}\n" for k, val in v.metadata().items())
    p.write_text(header + "".join(t + "\n" for t in v.tokens), encoding="utf-8")
    assert load(p) == v


@pytest.mark.parametrize("body,exc", [
    ("61\n61\n", DuplicateToken),
    ("61\n\n62\n", MalformedLine),
    ("61\r\n62\n", MalformedLine),
    ("6Z\n", MalformedLine),
    ("61\n##GZ\n", MalformedLine),
])
def test_load_rejects(tmp_path, body, exc):
    p = tmp_path / "v.txt"
    p.write_bytes(body.encode())
    with pytest.raises(exc):
        load(p)


def test_load_size_mismatch(tmp_path):
    v = fallback_vocab()
    p = tmp_path / "v.txt"
    save(v, p)
    p.write_text("".join(t + "\n" for t in v.tokens[:-1]), encoding="utf-8")
    with pytest.raises(MalformedLine):
        load(p)


def test_wwb_rejects_trailing(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("61\n##62\n", encoding="utf-8")
    meta_path(p)
    with open(meta_path(p), "w", encoding="utf-8") as f:
        f.write("#!distinguish_leading = false\n")
    with pytest.raises(MalformedLine):
        load(p)


def test_external_vocab(tmp_path):
    p = tmp_path / "mbert.txt"
    p.write_text("[PAD]\n[UNK]\nthe\n##ing\n中\n", encoding="utf-8")
    v = load_external_text_vocab(p)
    assert len(v) == 5 and v.specials == ("[PAD]", "[UNK]")
    assert not v.is_bbpe and v.learned_tokens() == ["the", "##ing", "中"]
    assert not looks_like_bbpe(p)
    assert load_any(p).source == "external_text"
    with pytest.raises(TypeError):
        v.byte_token(2)


def test_external_vocab_duplicate(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("a\nb\na\n", encoding="utf-8")
    with pytest.raises(DuplicateToken):
        load_external_text_vocab(p)


def test_load_any_detects_bbpe(tmp_path):
    p = tmp_path / "v.txt"
    save(fallback_vocab(), p)
    assert looks_like_bbpe(p) and load_any(p).is_bbpe
    with pytest.raises(ValueError):
        load_any(p, "json")
