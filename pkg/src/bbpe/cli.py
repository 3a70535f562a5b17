"""Command-line interface.

Exit status: 0 on success, 1 on usage errors, 2 on bad input data.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from . import config as cfgmod
from .analysis import (
    frequency_profile,
    parse_script_map,
    tokenization_compare,
    vocab_diff_rows,
    write_diff_csv,
)
from .corpus import CorpusSpec, measure, read_lines, stream, upsample_plan
from .errors import BBPEError
from .tokenizer import Tokenizer, TokenizerOptions, detokenize
from .trainer import TrainerConfig, read_merges, train, write_merges
from .vocab import finalize, load, load_any, save

log = logging.getLogger("bbpe")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="bbpe", description="Byte-level BPE vocabularies and tokenization.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("train", parents=[common], help="learn a vocabulary")
    t.add_argument("--input", nargs="+", default=[], help="plain-text files (one document per line)")
    t.add_argument("--vocab-size", type=_positive)
    t.add_argument("--out", required=True, help="vocabulary file to write")
    t.add_argument("--merges", help="also write the merge list here")
    t.add_argument("--wwb", action="store_true", help="no leading/trailing split")
    t.add_argument("--min-freq", type=_positive, help="minimum pair frequency")
    t.add_argument("--max-token-bytes", type=_positive)
    t.add_argument("--no-prune", action="store_true", help="keep learned tokens that end up rare")
    t.add_argument("--threads", type=_positive)
    t.add_argument("--seed", type=int)
    t.add_argument("--alpha", type=float, help="upsampling exponent in (0, 1]")

    k = sub.add_parser("tokenize", parents=[common], help="stdin text -> tokens")
    k.add_argument("--vocab", required=True)
    k.add_argument("--ids", action="store_true", help="emit ids instead of tokens")
    k.add_argument("--wbl", action="store_true", help="add '##' at tokenize time (position-free vocab)")
    k.add_argument("--merge-replay", action="store_true", help="replay merges instead of longest match")
    k.add_argument("--merges", help="merge list for --merge-replay")

    d = sub.add_parser("detokenize", parents=[common], help="stdin tokens -> text")
    d.add_argument("--vocab", help="vocabulary (required with --ids)")
    d.add_argument("--ids", action="store_true")

    a = sub.add_parser("analyze-freq", parents=[common], help="token frequency profile")
    a.add_argument("--vocab", required=True)
    a.add_argument("--format", choices=["auto", "bbpe", "text"], default="auto")
    a.add_argument("--corpus", nargs="+", required=True)
    a.add_argument("--out", required=True, help="CSV: token,count")
    a.add_argument("--threshold", type=int, default=100)
    a.add_argument("--plot", help="optional chart file (needs matplotlib)")

    v = sub.add_parser("vocab-diff", parents=[common], help="(A - B) / A per script label")
    v.add_argument("--a", required=True)
    v.add_argument("--b", required=True)
    v.add_argument("--a-format", choices=["auto", "bbpe", "text"], default="auto")
    v.add_argument("--b-format", choices=["auto", "bbpe", "text"], default="auto")
    v.add_argument("--script-map", help="'label=Script,...; ...'")
    v.add_argument("--out", help="CSV path (default stdout)")

    c = sub.add_parser("compare", parents=[common], help="side-by-side tokenizations")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--a-format", choices=["auto", "bbpe", "text"], default="auto")
    c.add_argument("--b-format", choices=["auto", "bbpe", "text"], default="auto")
    c.add_argument("text", nargs="*", help="sentences (default: stdin lines)")
    return p


class _Out:
    """UTF-8, LF-only writer over the binary stdout."""

    def write(self, text):
        sys.stdout.buffer.write(text.encode("utf-8"))

    def flush(self):
        sys.stdout.buffer.flush()


def _stdin_lines():
    for raw in sys.stdin.buffer:
        yield raw.decode("utf-8").removesuffix("\n").removesuffix("\r")


def cmd_train(args, conf) -> int:
    vocab_size = args.vocab_size or cfgmod.get_int(conf, "vocab_size", None)
    if vocab_size is None:
        raise UsageError("--vocab-size (or vocab_size in the config) is required")
    seed = args.seed if args.seed is not None else cfgmod.get_int(conf, "seed", 0)
    alpha = args.alpha if args.alpha is not None else cfgmod.get_float(conf, "alpha", 0.5)
    if args.input:
        spec = CorpusSpec.from_paths(args.input, alpha=alpha, seed=seed)
    else:
        spec = cfgmod.corpus_spec(conf)
        if spec is None:
            raise UsageError("no corpus: pass --input or corpus.<lang> entries in the config")
        spec = CorpusSpec(spec.sources, alpha, seed)
    tcfg = TrainerConfig(
        vocab_size=vocab_size,
        min_pair_frequency=args.min_freq or cfgmod.get_int(conf, "min_pair_frequency", 2),
        distinguish_leading=not args.wwb and cfgmod.get_bool(conf, "distinguish_leading", True),
        max_token_bytes=args.max_token_bytes or cfgmod.get_int(conf, "max_token_bytes", 16),
        specials=cfgmod.specials(conf),
        preprocess=cfgmod.preprocess_config(conf),
        prune=not args.no_prune and cfgmod.get_bool(conf, "prune", True),
        threads=args.threads or cfgmod.get_int(conf, "threads", 1),
    )
    stats = measure(spec)
    plan = upsample_plan(stats, spec.alpha)
    for tag in stats:
        log.info("corpus %s: %d lines, %d bytes, x%.3f", tag, stats[tag].lines, stats[tag].bytes, plan[tag])
    started = time.perf_counter()
    result = train(stream(spec, plan), tcfg)
    vocab = finalize(result, tcfg)
    save(vocab, args.out)
    if args.merges:
        write_merges(result.merges, args.merges)
    log.info("wrote %d tokens (%d learned, %d merges) in %.1fs",
             len(vocab), len(result.learned), len(result.merges), time.perf_counter() - started)
    return EXIT_OK


def cmd_tokenize(args, conf) -> int:
    if args.merge_replay and not args.merges:
        raise UsageError("--merge-replay needs --merges")
    vocab = load(args.vocab)
    opts = TokenizerOptions(wbl_mode=args.wbl, emit_ids=args.ids, merge_replay=args.merge_replay)
    merges = read_merges(args.merges, vocab.distinguish_leading) if args.merge_replay else None
    tok = Tokenizer(vocab, opts, merges)
    out = _Out()
    for line in _stdin_lines():
        pieces = tok(line)
        out.write(" ".join(map(str, pieces)) + "\n")
    return EXIT_OK


def cmd_detokenize(args, conf) -> int:
    if args.ids and not args.vocab:
        raise UsageError("--ids needs --vocab")
    vocab = load(args.vocab) if args.vocab else None
    out = _Out()
    if vocab is not None:
        tok = Tokenizer(vocab, TokenizerOptions(wbl_mode=not vocab.distinguish_leading))
    for line in _stdin_lines():
        fields = [f for f in line.split(" ") if f]
        if args.ids:
            try:
                ids = [int(f) for f in fields]
            except ValueError as exc:
                raise BBPEError(f"not an id: {exc}") from None
            if any(not 0 <= i < len(vocab) for i in ids):
                raise BBPEError("id out of range")
            out.write(tok.decode(ids) + "\n")
        elif vocab is not None:
            out.write(detokenize(fields, vocab.specials, vocab.sentence_stops) + "\n")
        else:
            out.write(detokenize(fields) + "\n")
    return EXIT_OK


def _read_corpus(paths):
    for p in paths:
        yield from read_lines(p)


def cmd_analyze_freq(args, conf) -> int:
    vocab = load_any(args.vocab, args.format)
    prof = frequency_profile(vocab, _read_corpus(args.corpus))
    prof.write_csv(args.out)
    body = prof.subset(t for t in vocab.tokens if t not in vocab.specials)
    learned = prof.subset(vocab.learned_tokens())
    err = sys.stderr
    print(f"tokens emitted: {prof.total}", file=err)
    for name, p in (("non-special", body), ("learned", learned)):
        print(f"{name}: n={len(p.tokens)} below({args.threshold})={p.fraction_below(args.threshold):.4f} "
              f"zero={p.fraction_zero:.4f}", file=err)
    if args.plot:
        _plot_profile(body, args.plot)
    return EXIT_OK


def _plot_profile(profile, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    counts = profile.sorted_counts()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(range(1, len(counts) + 1), [max(c, 0.5) for c in counts])
    ax.set_yscale("log")
    ax.set_xlabel("token rank")
    ax.set_ylabel("corpus frequency")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_vocab_diff(args, conf) -> int:
    script_map = args.script_map or conf.get("script_map")
    script_map = parse_script_map(script_map) if script_map else None
    a = load_any(args.a, args.a_format)
    b = load_any(args.b, args.b_format)
    rows = vocab_diff_rows(a, b, script_map)
    write_diff_csv(rows, args.out or _Out())
    return EXIT_OK


def cmd_compare(args, conf) -> int:
    a = load_any(args.a, args.a_format)
    b = load_any(args.b, args.b_format)
    texts = args.text or list(_stdin_lines())
    out = _Out()
    for text in texts:
        cmp = tokenization_compare(text, a, b)
        out.write(f"text\t{text}\n")
        out.write(f"A[{cmp.count_a}]\t{' '.join(cmp.tokens_a)}\n")
        out.write(f"B[{cmp.count_b}]\t{' '.join(cmp.tokens_b)}\n")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "tokenize": cmd_tokenize,
    "detokenize": cmd_detokenize,
    "analyze-freq": cmd_analyze_freq,
    "vocab-diff": cmd_vocab_diff,
    "compare": cmd_compare,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    try:
        conf = cfgmod.load_config(args.config)
        return COMMANDS[args.command](args, conf)
    except UsageError as exc:
        print(f"bbpe {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BBPEError, OSError, UnicodeDecodeError, ValueError) as exc:
        print(f"bbpe {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
