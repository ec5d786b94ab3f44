"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class AmlError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AmlError, ValueError):
    """Bad input: wrong ring, malformed config, violated precondition."""


class DomainError(ValidationError):
    """Argument at a pole or outside the domain of a special function."""


class NotInvertibleError(ValidationError):
    """Ring element whose degree-0 part vanishes."""


class TruncationError(ValidationError):
    """A coefficient stream is too short for the requested computation."""


class NumericQualityError(AmlError):
    """A numerical self-check failed (divergent residuals, wrong spectrum)."""


class CacheFormatError(ValidationError):
    """A stream cache file is corrupt, from another version, or for another ring."""
