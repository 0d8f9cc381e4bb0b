"""Comparable corpus data model, ingestion, tokenization and stop words."""

import json
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import regex

from pivotex.errors import ConfigError, IngestError, UnknownSentenceError


_TOKEN = regex.compile(r"[\p{L}\p{M}\p{N}]+")

_ISO_DAY = re.compile(r"^\d{4}-\d{2}-\d{2}$")


DEFAULT_STOP_WORDS = frozenset(
    {
        "a",
        "about",
        "all",
        "an",
        "and",
        "are",
        "as",
        "at",
        "be",
        "but",
        "by",
        "can",
        "did",
        "do",
        "does",
        "for",
        "from",
        "has",
        "have",
        "he",
        "her",
        "his",
        "i",
        "in",
        "into",
        "is",
        "it",
        "its",
        "just",
        "more",
        "my",
        "no",
        "not",
        "of",
        "on",
        "only",
        "or",
        "out",
        "she",
        "should",
        "so",
        "some",
        "than",
        "that",
        "the",
        "their",
        "there",
        "they",
        "this",
        "to",
        "up",
        "was",
        "we",
        "were",
        "when",
        "which",
        "who",
        "will",
        "with",
        "you",
    }
)


@dataclass(frozen=True)
class Sentence:
    """A dated, language-tagged, tokenized sentence.

    Attributes:
        id: Identifier unique within one corpus side
        doc_id: Identifier of the parent document
        lang: Language tag
        date: Publication date of the parent document
        text: Raw sentence text
        tokens: Lowercased tokens derived from text
    """

    id: int
    doc_id: str
    lang: str
    date: date
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class Document:
    """A dated document holding an ordered list of sentence ids.

    Attributes:
        id: Document identifier
        lang: Language tag
        date: Publication date
        sentence_ids: Ordered ids of the document's sentences
    """

    id: str
    lang: str
    date: date
    sentence_ids: tuple[int, ...]


@dataclass(frozen=True)
class CorpusSide:
    """All documents and sentences of one language side.

    Attributes:
        lang: Language tag shared by every document
        documents: Documents in ingestion order
        sentences: Mapping from sentence id to sentence
    """

    lang: str
    documents: tuple[Document, ...] = ()
    sentences: Mapping[int, Sentence] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        for document in self.documents:
            for sentence_id in document.sentence_ids:
                yield self.sentences[sentence_id]

    def sentence(self, sentence_id: int) -> Sentence:
        """Look up a sentence by id.

        Args:
            sentence_id: Sentence identifier

        Returns:
            The sentence

        Raises:
            UnknownSentenceError: If the id is not part of this side
        """
        try:
            return self.sentences[sentence_id]
        except KeyError:
            raise UnknownSentenceError(
                f"sentence {sentence_id} not found in '{self.lang}' side"
            ) from None


@dataclass(frozen=True)
class ComparableCorpus:
    """Source and target sides of a comparable corpus."""

    source_side: CorpusSide
    target_side: CorpusSide

    def __post_init__(self) -> None:
        if self.source_side.lang == self.target_side.lang:
            raise ConfigError(
                f"corpus sides must use distinct language tags, both are '{self.source_side.lang}'"
            )


@dataclass(frozen=True)
class PivotSentence:
    """Pivot-language rendering of a sentence, keyed by the original id.

    Attributes:
        id: Id of the original-language sentence
        date: Date of the original sentence
        tokens: Pivot-language tokens (stop words not removed)
    """

    id: int
    date: date
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class StopWordList:
    """Case-insensitive set of pivot-language stop words."""

    words: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "words", frozenset(w.lower() for w in self.words))

    def __contains__(self, token: object) -> bool:
        return isinstance(token, str) and token.lower() in self.words

    def __len__(self) -> int:
        return len(self.words)


@dataclass(frozen=True)
class RawDocument:
    """A document record before id assignment."""

    date: date
    sentences: tuple[str, ...]
    id: str | None = None


def tokenize(text: str) -> tuple[str, ...]:
    """Split text into lowercased letter/number runs.

    Combining marks stay attached to their letters, so scripts written with
    diacritics split the same way as plain Latin text.

    Args:
        text: Raw text

    Returns:
        Tuple of tokens, empty for text without letters or digits
    """
    return tuple(_TOKEN.findall(text.lower()))


def remove_stop_words(tokens: Sequence[str], stops: StopWordList) -> tuple[str, ...]:
    """Drop stop words, keeping the order of the remaining tokens.

    Args:
        tokens: Token sequence
        stops: Stop words to remove

    Returns:
        Tokens not present in stops
    """
    return tuple(token for token in tokens if token not in stops)


def parse_day(value: object) -> date:
    """Parse a strict YYYY-MM-DD calendar date.

    Args:
        value: Raw value from a record

    Returns:
        Parsed date

    Raises:
        ValueError: If value is not a valid calendar date in that form
    """
    if not isinstance(value, str) or not _ISO_DAY.match(value):
        raise ValueError(f"invalid date {value!r}, expected YYYY-MM-DD")
    return date.fromisoformat(value)


def build_side(lang: str, records: Iterable[RawDocument], first_id: int = 0) -> CorpusSide:
    """Assign ids to raw document records and build a corpus side.

    Sentence ids are consecutive integers in record order. Documents without
    an id get their position in the record stream as id.

    Args:
        lang: Language tag for every document
        records: Raw documents in order
        first_id: Id given to the first sentence

    Returns:
        Corpus side holding the documents and their sentences
    """
    documents: list[Document] = []
    sentences: dict[int, Sentence] = {}
    next_id = first_id

    for position, record in enumerate(records):
        doc_id = record.id if record.id is not None else str(position)
        ids: list[int] = []
        for text in record.sentences:
            sentences[next_id] = Sentence(
                id=next_id,
                doc_id=doc_id,
                lang=lang,
                date=record.date,
                text=text,
                tokens=tokenize(text),
            )
            ids.append(next_id)
            next_id += 1
        documents.append(Document(id=doc_id, lang=lang, date=record.date, sentence_ids=tuple(ids)))

    return CorpusSide(lang=lang, documents=tuple(documents), sentences=sentences)


def _parse_record(raw: object, lang: str, path: str, line: int) -> RawDocument:
    """Validate one decoded JSONL record.

    Args:
        raw: Decoded JSON value
        lang: Expected language tag
        path: File path for error messages
        line: 1-based line number for error messages

    Returns:
        Validated raw document

    Raises:
        IngestError: If the record is malformed
    """
    if not isinstance(raw, dict):
        raise IngestError("record must be a JSON object", path, line)

    record_id = raw.get("id")
    if record_id is not None and not isinstance(record_id, str):
        raise IngestError("'id' must be a string", path, line)

    label = record_id if record_id is not None else f"#{line}"

    record_lang = raw.get("lang", lang)
    if record_lang != lang:
        raise IngestError(f"language '{record_lang}' does not match '{lang}'", path, line, label)

    try:
        day = parse_day(raw.get("date"))
    except ValueError as e:
        raise IngestError(str(e), path, line, label) from None

    texts = raw.get("sentences")
    if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
        raise IngestError("'sentences' must be an array of strings", path, line, label)
    if not texts:
        raise IngestError("'sentences' must not be empty", path, line, label)

    return RawDocument(date=day, sentences=tuple(texts), id=record_id)


def ingest_corpus(path: str | Path, lang: str) -> CorpusSide:
    """Read a JSONL corpus file into a corpus side.

    Each non-blank line holds one document with fields ``id`` (optional),
    ``date`` (YYYY-MM-DD), ``lang`` and ``sentences``.

    Args:
        path: JSONL file location
        lang: Language tag expected for every record

    Returns:
        Corpus side with deterministic sentence ids

    Raises:
        IngestError: If the file cannot be read or a record is malformed
    """
    name = str(path)
    records: list[RawDocument] = []
    try:
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                except json.JSONDecodeError as e:
                    raise IngestError(f"invalid JSON: {e.msg}", name, line_no) from None
                records.append(_parse_record(raw, lang, name, line_no))
    except FileNotFoundError:
        raise IngestError("file not found", name) from None
    except PermissionError:
        raise IngestError("permission denied", name) from None
    except UnicodeDecodeError:
        raise IngestError("file is not valid UTF-8", name) from None

    return build_side(lang, records)


def dump_side(side: CorpusSide, path: str | Path) -> None:
    """Write a corpus side in canonical JSONL form.

    Args:
        side: Corpus side to serialize
        path: Output file location
    """
    with open(path, "w", encoding="utf-8") as f:
        for document in side.documents:
            record = {
                "date": document.date.isoformat(),
                "id": document.id,
                "lang": document.lang,
                "sentences": [side.sentences[i].text for i in document.sentence_ids],
            }
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            f.write("\n")


def load_stop_words(path: str | Path) -> StopWordList:
    """Load a stop-word list (one token per line, ``#`` lines ignored).

    Args:
        path: Stop-word file location

    Returns:
        Stop-word list

    Raises:
        IngestError: If the file cannot be read
    """
    try:
        with open(path, encoding="utf-8") as f:
            words = {
                line.strip()
                for line in f
                if line.strip() and not line.lstrip().startswith("#")
            }
    except FileNotFoundError:
        raise IngestError("stop-word file not found", str(path)) from None
    except PermissionError:
        raise IngestError("permission denied", str(path)) from None
    return StopWordList(frozenset(words))


def default_stop_words() -> StopWordList:
    """Return the built-in English stop-word list."""
    return StopWordList(DEFAULT_STOP_WORDS)
