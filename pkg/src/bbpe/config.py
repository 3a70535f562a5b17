"""Flat ``key = value`` configuration files with environment overrides.

Lines starting with ``#`` are comments. Any key can be overridden with an
environment variable ``BBPE_<KEY>`` (upper case, dots written as ``__``),
e.g. ``BBPE_VOCAB_SIZE=50000`` or ``BBPE_CORPUS__TH=th.txt``.
"""

from __future__ import annotations

import os

from .corpus import CorpusSpec, LanguageSource
from .errors import ConfigError
from .preprocess import PUNCTUATION_CATEGORIES, PreprocessConfig, parse_ranges
from .tokens import DEFAULT_SENTENCE_STOPS, DEFAULT_SPECIALS

ENV_PREFIX = "BBPE_"
CORPUS_PREFIX = "corpus."


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        out[key.strip().lower()] = value.strip()
    return out


def env_overrides(environ=None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    out = {}
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX) and name != "BBPE_PURE_PYTHON":
            out[name[len(ENV_PREFIX):].lower().replace("__", ".")] = value
    return out


def load_config(path=None, environ=None) -> dict[str, str]:
    """Config file values (paths resolved against its directory), then env."""
    cfg: dict[str, str] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                cfg = parse_config(f.read(), os.fspath(path))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        base = os.path.dirname(os.path.abspath(path))
        for key, value in cfg.items():
            if key.startswith(CORPUS_PREFIX):
                cfg[key] = ", ".join(os.path.join(base, p.strip()) for p in value.split(",") if p.strip())
    cfg.update(env_overrides(environ))
    return cfg


def get_bool(cfg, key, default: bool) -> bool:
    if key not in cfg:
        return default
    value = cfg[key].strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: not a boolean: {cfg[key]!r}")


def get_int(cfg, key, default):
    if key not in cfg:
        return default
    try:
        return int(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {cfg[key]!r}") from None


def get_float(cfg, key, default):
    if key not in cfg:
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key}: not a number: {cfg[key]!r}") from None


def preprocess_config(cfg) -> PreprocessConfig:
    try:
        return PreprocessConfig(
            cjk_ranges=parse_ranges(cfg["cjk_ranges"]) if "cjk_ranges" in cfg else PreprocessConfig.cjk_ranges,
            punctuation_categories=tuple(cfg.get("punctuation_categories", " ".join(PUNCTUATION_CATEGORIES)).split()),
            sentence_stops=tuple(cfg["sentence_stops"].split()) if "sentence_stops" in cfg else DEFAULT_SENTENCE_STOPS,
            nfc=get_bool(cfg, "nfc", False),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def specials(cfg) -> tuple[str, ...]:
    return tuple(cfg["specials"].split()) if "specials" in cfg else DEFAULT_SPECIALS


def corpus_spec(cfg) -> CorpusSpec | None:
    sources = [
        LanguageSource(key[len(CORPUS_PREFIX):], tuple(p.strip() for p in value.split(",") if p.strip()))
        for key, value in sorted(cfg.items())
        if key.startswith(CORPUS_PREFIX)
    ]
    if not sources:
        return None
    try:
        return CorpusSpec(tuple(sources), get_float(cfg, "alpha", 0.5), get_int(cfg, "seed", 0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
