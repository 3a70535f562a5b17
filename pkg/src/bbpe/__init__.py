"""Byte-level BPE: training, vocabularies, lossless tokenization and analysis."""

from .errors import (
    BBPEError,
    ConfigError,
    DuplicateToken,
    EmptyCorpus,
    InvalidUtf8,
    MalformedLine,
    MalformedToken,
    OrphanTrailing,
    VocabOverflow,
)
from .preprocess import PreprocessConfig, Preprocessor, normalize, preprocess, to_byte_words
from .tokens import ByteToken, Position, PreprocessedText, SentenceStop, Word, parse_token, render_token
from .trainer import MergeRule, TrainerConfig, TrainResult, read_merges, train, write_merges
from .vocab import Vocabulary, finalize, load, load_any, load_external_text_vocab, save
from .tokenizer import Tokenizer, TokenizerOptions, decode, detokenize, encode, tokenize, tokenize_word
from .analysis import classify_token_language, frequency_profile, tokenization_compare, vocab_diff
from .corpus import CorpusSpec, LanguageSource, stream, upsample_plan
from .kernels import BACKEND

__version__ = "0.1.0"
