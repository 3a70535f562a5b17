"""Exception types raised across the toolkit."""


class BBPEError(Exception):
    """Base class for all toolkit errors."""


class MalformedToken(BBPEError, ValueError):
    pass


class MalformedLine(BBPEError, ValueError):
    def __init__(self, path, lineno, reason):
        super().__init__(f"{path}:{lineno}: {reason}")
        self.path = path
        self.lineno = lineno


class DuplicateToken(MalformedLine):
    pass


class VocabOverflow(BBPEError):
    pass


class InvalidUtf8(BBPEError, ValueError):
    pass


class OrphanTrailing(BBPEError, ValueError):
    pass


class ConfigError(BBPEError, ValueError):
    pass


class EmptyCorpus(UserWarning):
    """Training saw no words; the result holds fallbacks only."""
