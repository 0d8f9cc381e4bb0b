"""Date-windowed BM25 retrieval over pivot-language sentences."""

import bisect
import logging
import math
import pickle
from collections import Counter
from collections.abc import Collection, Iterable, Sequence
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from pivotex.corpus import PivotSentence, StopWordList, remove_stop_words
from pivotex.errors import IndexBuildError, UnknownSentenceError


logger = logging.getLogger(__name__)

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

CACHE_MAGIC = b"PIVOTEX-INDEX"
CACHE_VERSION = 1


@dataclass(frozen=True)
class IrHit:
    """A retrieved sentence with its retrieval score."""

    sentence_id: int
    ir_score: float


@dataclass
class InvertedIndex:
    """Inverted index over pivot sentences, immutable once built.

    Attributes:
        postings: Token to (sentence id, term frequency) pairs in id order
        doc_lengths: Sentence id to token count after stop-word removal
        avg_len: Mean of doc_lengths
        n_docs: Number of indexed sentences
        date_of: Sentence id to publication date
        stops: Stop words removed from documents and queries
        k1: BM25 term-frequency saturation
        b: BM25 length normalisation
    """

    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: dict[int, int]
    avg_len: float
    n_docs: int
    date_of: dict[int, date]
    stops: StopWordList = field(default_factory=StopWordList)
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    _by_date: list[tuple[date, int]] = field(default_factory=list, repr=False)
    _tf: dict[int, dict[str, int]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self._by_date:
            self._by_date = sorted((d, i) for i, d in self.date_of.items())
        if not self._tf:
            for token, entries in self.postings.items():
                for sentence_id, tf in entries:
                    self._tf.setdefault(sentence_id, {})[token] = tf

    def idf(self, token: str) -> float:
        """BM25 inverse document frequency, floored at 0."""
        n = len(self.postings.get(token, ()))
        if n == 0:
            return 0.0
        return max(0.0, math.log(1.0 + (self.n_docs - n + 0.5) / (n + 0.5)))

    def term_weight(self, token: str, sentence_id: int) -> float:
        """BM25 contribution of one query token to one sentence."""
        tf = self._tf.get(sentence_id, {}).get(token, 0)
        if tf == 0:
            return 0.0
        length = self.doc_lengths[sentence_id]
        norm = 1.0 - self.b + self.b * length / self.avg_len if self.avg_len > 0 else 1.0
        return self.idf(token) * tf * (self.k1 + 1.0) / (tf + self.k1 * norm)

    def ids_in_window(self, day: date, window_days: int) -> list[int]:
        """Return ids dated within window_days of day, in ascending id order."""
        low = bisect.bisect_left(self._by_date, (day - timedelta(days=window_days), -1))
        high = bisect.bisect_right(
            self._by_date, (day + timedelta(days=window_days), math.inf)
        )
        return sorted(i for _, i in self._by_date[low:high])


def build_index(
    sentences: Iterable[PivotSentence],
    stops: StopWordList | None = None,
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    """Build an inverted index over pivot sentences.

    Args:
        sentences: Pivot sentences with unique ids
        stops: Stop words excluded from postings
        k1: BM25 term-frequency saturation
        b: BM25 length normalisation

    Returns:
        Built index

    Raises:
        IndexBuildError: If two sentences share an id
    """
    stop_list = stops if stops is not None else StopWordList()
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: dict[int, int] = {}
    date_of: dict[int, date] = {}

    for sentence in sorted(sentences, key=lambda s: s.id):
        if sentence.id in doc_lengths:
            raise IndexBuildError(f"duplicate sentence id {sentence.id}")
        content = remove_stop_words(sentence.tokens, stop_list)
        doc_lengths[sentence.id] = len(content)
        date_of[sentence.id] = sentence.date
        for token, tf in sorted(Counter(content).items()):
            postings.setdefault(token, []).append((sentence.id, tf))

    n_docs = len(doc_lengths)
    avg_len = math.fsum(doc_lengths.values()) / n_docs if n_docs else 0.0

    logger.debug("indexed %d sentences, %d distinct tokens", n_docs, len(postings))
    return InvertedIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avg_len=avg_len,
        n_docs=n_docs,
        date_of=date_of,
        stops=stop_list,
        k1=k1,
        b=b,
    )


def bm25_score(index: InvertedIndex, query: Sequence[str], sentence_id: int) -> float:
    """Score one indexed sentence against a query with BM25.

    Repeated query tokens count once.

    Args:
        index: Inverted index
        query: Query tokens
        sentence_id: Id of an indexed sentence

    Returns:
        BM25 score, 0 when no query token occurs in the sentence

    Raises:
        UnknownSentenceError: If sentence_id is not indexed
    """
    if sentence_id not in index.doc_lengths:
        raise UnknownSentenceError(f"sentence {sentence_id} is not indexed")
    terms = dict.fromkeys(remove_stop_words(query, index.stops))
    return math.fsum(index.term_weight(token, sentence_id) for token in terms)


def query_window(
    index: InvertedIndex,
    query_sentence: PivotSentence,
    window_days: int,
    top_k: int,
    restrict_to: Collection[int] | None = None,
) -> list[IrHit]:
    """Retrieve the best-scoring sentences dated near the query.

    Only sentences dated at most window_days away from the query, and in
    restrict_to when given, are scored. Sentences sharing no query token are
    not returned.

    Args:
        index: Inverted index
        query_sentence: Pivot query with its date
        window_days: Half-width of the date window in days
        top_k: Maximum number of hits
        restrict_to: Optional set of admissible ids

    Returns:
        Hits by descending score, ties by ascending id

    Raises:
        ValueError: If top_k < 1 or window_days < 0
    """
    if top_k < 1:
        raise ValueError(f"top_k must be at least 1, got {top_k}")
    if window_days < 0:
        raise ValueError(f"window_days must be non-negative, got {window_days}")

    low = query_sentence.date - timedelta(days=window_days)
    high = query_sentence.date + timedelta(days=window_days)
    allowed = set(restrict_to) if restrict_to is not None else None

    candidates: set[int] = set()
    terms = dict.fromkeys(remove_stop_words(query_sentence.tokens, index.stops))
    for token in terms:
        for sentence_id, _ in index.postings.get(token, ()):
            if allowed is not None and sentence_id not in allowed:
                continue
            if low <= index.date_of[sentence_id] <= high:
                candidates.add(sentence_id)

    hits = [
        IrHit(sentence_id, math.fsum(index.term_weight(t, sentence_id) for t in terms))
        for sentence_id in candidates
    ]
    hits = [hit for hit in hits if hit.ir_score > 0.0]
    hits.sort(key=lambda hit: (-hit.ir_score, hit.sentence_id))
    return hits[:top_k]


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Persist an index as a versioned binary cache file."""
    payload = {
        "postings": index.postings,
        "doc_lengths": index.doc_lengths,
        "date_of": index.date_of,
        "stops": sorted(index.stops.words),
        "k1": index.k1,
        "b": index.b,
    }
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC)
        f.write(bytes([CACHE_VERSION]))
        pickle.dump(payload, f, protocol=pickle.HIGHEST_PROTOCOL)


def load_index(path: str | Path) -> InvertedIndex:
    """Load an index written by save_index.

    Raises:
        IndexBuildError: If the file is missing, foreign, corrupt or of another version
    """
    try:
        with open(path, "rb") as f:
            header = f.read(len(CACHE_MAGIC) + 1)
            if header[: len(CACHE_MAGIC)] != CACHE_MAGIC:
                raise IndexBuildError(f"'{path}' is not an index cache file")
            if header[-1] != CACHE_VERSION:
                raise IndexBuildError(f"'{path}' has cache version {header[-1]}")
            payload = pickle.load(f)  # noqa: S301
    except OSError as e:
        raise IndexBuildError(f"cannot read index cache '{path}': {e}") from e
    except (pickle.UnpicklingError, EOFError, AttributeError, ImportError, ValueError) as e:
        raise IndexBuildError(f"index cache '{path}' is corrupt: {e}") from e

    try:
        doc_lengths: dict[int, int] = payload["doc_lengths"]
        n_docs = len(doc_lengths)
        return InvertedIndex(
            postings=payload["postings"],
            doc_lengths=doc_lengths,
            avg_len=math.fsum(doc_lengths.values()) / n_docs if n_docs else 0.0,
            n_docs=n_docs,
            date_of=payload["date_of"],
            stops=StopWordList(frozenset(payload["stops"])),
            k1=payload["k1"],
            b=payload["b"],
        )
    except (KeyError, TypeError, AttributeError) as e:
        raise IndexBuildError(f"index cache '{path}' is corrupt: {e!r}") from e
