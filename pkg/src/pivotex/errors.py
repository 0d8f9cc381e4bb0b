"""Exception types raised by the extraction library."""


class ExtractionError(Exception):
    """Base class for all errors raised by pivotex."""


class IngestError(ExtractionError):
    """A corpus or resource file could not be ingested.

    Attributes:
        path: File being read
        line: 1-based line number of the offending record, if known
        record: Identifier of the offending record, if known
    """

    def __init__(
        self, message: str, path: str, line: int | None = None, record: str | None = None
    ) -> None:
        location = path if line is None else f"{path}:{line}"
        if record is not None:
            location = f"{location} (record '{record}')"
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line = line
        self.record = record


class TranslationError(ExtractionError):
    """A translation adapter failed for a sentence.

    Attributes:
        sentence_id: Id of the sentence being translated, if known
    """

    def __init__(self, message: str, sentence_id: int | None = None) -> None:
        prefix = f"sentence {sentence_id}: " if sentence_id is not None else ""
        super().__init__(f"{prefix}{message}")
        self.sentence_id = sentence_id


class DictionaryError(ExtractionError):
    """A probabilistic dictionary violates its invariants."""


class IndexBuildError(ExtractionError):
    """The inverted index could not be built or loaded."""


class UnknownSentenceError(ExtractionError, KeyError):
    """A sentence id is not present in the structure being queried."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown sentence"


class StatsError(ExtractionError):
    """Term statistics are missing or unusable for NGD."""


class MetricError(ExtractionError, ValueError):
    """An edit-distance metric was called with unusable input."""


class ConfigError(ExtractionError, ValueError):
    """Pipeline or generator configuration is inconsistent."""
