import io
import subprocess
import sys

import pytest

from bbpe.cli import run
from bbpe.vocab import load

from corpus_gen import sentences


def call(argv, stdin="", monkeypatch=None):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(stdin.encode("utf-8"))))
    out = io.TextIOWrapper(io.BytesIO(), encoding="utf-8")
    monkeypatch.setattr(sys, "stdout", out)
    code = run(argv)
    out.flush()
    return code, out.buffer.getvalue().decode("utf-8")


@pytest.fixture
def corpus(tmp_path):
    en = tmp_path / "en.txt"
    en.write_text("\n".join(sentences("en", 600)) + "\n", encoding="utf-8")
    zh = tmp_path / "zh.txt"
    zh.write_text("\n".join(sentences("zh", 200)) + "\n", encoding="utf-8")
    conf = tmp_path / "c.conf"
    conf.write_text("corpus.en = en.txt\ncorpus.zh = zh.txt\nmin_pair_frequency = 2\n", encoding="utf-8")
    return tmp_path


@pytest.fixture
def trained(corpus, monkeypatch):
    code, _ = call(["train", "--config", str(corpus / "c.conf"), "--vocab-size", "800",
                    "--out", str(corpus / "v.txt"), "--merges", str(corpus / "m.txt")], monkeypatch=monkeypatch)
    assert code == 0
    return corpus


def test_train_line_count(trained):
    lines = (trained / "v.txt").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 800 == len(load(trained / "v.txt"))
    assert (trained / "m.txt").read_text(encoding="utf-8").count("\n") >= 800 - 523


def test_train_with_input_files(corpus, monkeypatch):
    out = corpus / "w.txt"
    code, _ = call(["train", "--input", str(corpus / "en.txt"), "--vocab-size", "600", "--wwb",
                    "--out", str(out)], monkeypatch=monkeypatch)
    assert code == 0
    v = load(out)
    assert not v.distinguish_leading and len(v) == 600


def test_tokenize_detokenize_pipeline(trained, monkeypatch):
    text = "Hello world, 中文2019年。\nsecond line!\n\n"
    code, toks = call(["tokenize", "--vocab", str(trained / "v.txt")], text, monkeypatch)
    assert code == 0 and toks.count("\n") == 3
    code, back = call(["detokenize"], toks, monkeypatch)
    assert code == 0
    assert back == "Hello world , 中 文 2019 年 。\nsecond line !\n\n"
    code, ids = call(["tokenize", "--vocab", str(trained / "v.txt"), "--ids"], text, monkeypatch)
    code, back2 = call(["detokenize", "--ids", "--vocab", str(trained / "v.txt")], ids, monkeypatch)
    assert back2 == back


def test_tokenize_empty_stdin(trained, monkeypatch):
    assert call(["tokenize", "--vocab", str(trained / "v.txt")], "", monkeypatch) == (0, "")


def test_merge_replay_cli(trained, monkeypatch):
    code, toks = call(["tokenize", "--vocab", str(trained / "v.txt"), "--merge-replay",
                       "--merges", str(trained / "m.txt")], "the word\n", monkeypatch)
    assert code == 0 and toks.strip()


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["tokenize"],
    ["train", "--out", "x.txt", "--vocab-size", "0"],
    ["train", "--out", "x.txt", "--vocab-size", "abc"],
    ["train", "--out", "x.txt", "--vocab-size", "600"],
    ["tokenize", "--vocab", "v.txt", "--merge-replay"],
    ["detokenize", "--ids"],
])
def test_usage_errors_exit_1(argv, monkeypatch, capsys):
    code, _ = call(argv, "", monkeypatch)
    assert code == 1
    assert capsys.readouterr().err


def test_data_errors_exit_2(trained, tmp_path, monkeypatch, capsys):
    v = str(trained / "v.txt")
    assert call(["tokenize", "--vocab", str(tmp_path / "nope.txt")], "", monkeypatch)[0] == 2
    assert call(["detokenize"], "##61\n", monkeypatch)[0] == 2
    assert call(["detokenize"], "E8 ##A9\n", monkeypatch)[0] == 2
    assert call(["detokenize", "--ids", "--vocab", v], "99999\n", monkeypatch)[0] == 2
    assert call(["detokenize", "--ids", "--vocab", v], "x\n", monkeypatch)[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("61\n61\n", encoding="utf-8")
    assert call(["tokenize", "--vocab", str(bad)], "a\n", monkeypatch)[0] == 2
    assert "DuplicateToken" in capsys.readouterr().err
    small = tmp_path / "c2.conf"
    small.write_text("corpus.x = nope.txt\n", encoding="utf-8")
    assert call(["train", "--config", str(small), "--vocab-size", "600", "--out", str(tmp_path / "o.txt")],
                "", monkeypatch)[0] == 2


def test_analyze_freq(trained, monkeypatch, capsys):
    out = trained / "f.csv"
    code, _ = call(["analyze-freq", "--vocab", str(trained / "v.txt"), "--corpus",
                    str(trained / "en.txt"), str(trained / "zh.txt"), "--out", str(out)], "", monkeypatch)
    assert code == 0
    rows = out.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "token,count" and len(rows) == 801
    assert "learned:" in capsys.readouterr().err


def test_vocab_diff_and_compare(trained, tmp_path, monkeypatch):
    ext = tmp_path / "mbert.txt"
    ext.write_text("[PAD]\n[UNK]\nthe\n##ing\n中\n文\nж\n", encoding="utf-8")
    code, csv_out = call(["vocab-diff", "--a", str(ext), "--b", str(ext)], "", monkeypatch)
    assert code == 0
    assert csv_out.splitlines()[0] == "label,countA,countB,rel_diff"
    assert all(line.endswith(",0.0") for line in csv_out.splitlines()[1:])
    dest = tmp_path / "d.csv"
    code, _ = call(["vocab-diff", "--a", str(trained / "v.txt"), "--b", str(ext), "--out", str(dest)], "", monkeypatch)
    assert code == 0 and dest.read_text(encoding="utf-8").startswith("label,")
    code, text = call(["compare", "--a", str(trained / "v.txt"), "--b", str(ext), "中文"], "", monkeypatch)
    assert code == 0
    assert text.splitlines()[2] == "B[2]\t中 文"


def test_outputs_deterministic(corpus, monkeypatch):
    outs = []
    for i in range(2):
        v = corpus / f"d{i}.txt"
        m = corpus / f"d{i}.m"
        call(["train", "--config", str(corpus / "c.conf"), "--vocab-size", "700", "--out", str(v),
              "--merges", str(m), "--threads", str(1 + 3 * i)], monkeypatch=monkeypatch)
        outs.append((v.read_bytes(), m.read_bytes()))
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bbpe", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "tokenize" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "bbpe", "nope"], capture_output=True, text=True)
    assert proc.returncode == 1


def test_subprocess_pipeline(trained):
    v = str(trained / "v.txt")
    tok = subprocess.run([sys.executable, "-m", "bbpe", "tokenize", "--vocab", v],
                         input="詒 abc\r\nx\n".encode(), capture_output=True)
    assert tok.returncode == 0
    back = subprocess.run([sys.executable, "-m", "bbpe", "detokenize"], input=tok.stdout, capture_output=True)
    assert back.stdout.decode() == "詒 abc\nx\n"
