"""Exception types shared across the engine.

All data-dependent failures derive from :class:`DataError` so callers (and
the CLI) can distinguish bad input data from programming errors.
"""


class DataError(Exception):
    """Base class for errors caused by invalid or inconsistent input data."""


class CorpusFormatError(DataError):
    """A corpus file could not be parsed or violates the record schema."""


class DuplicateIdError(DataError):
    """Two records declare the same id."""


class DanglingIdError(DataError):
    """A record references an id that does not resolve in the corpus."""


class UnknownDocumentError(DataError):
    """A scoring request names a document absent from the index."""


class MissingScoreError(DataError):
    """A relevance lookup has no entry for the requested (claim, premise) pair."""


class MissingEmbeddingError(DataError):
    """An embedding lookup has no vector for the requested id."""
