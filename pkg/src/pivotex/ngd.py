"""Normalized Google Distance over reference-corpus document frequencies.

Google hit counts are replaced by document frequencies in a reference
collection: ``f(t)`` is the number of reference documents containing ``t``,
``f(a, b)`` the number containing both, and ``N`` the collection size.
Logarithms are base 2.
"""

import logging
import math
import threading
from collections import OrderedDict
from collections.abc import Collection, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import numpy.typing as npt

from pivotex.errors import IngestError, StatsError


logger = logging.getLogger(__name__)

DENOMINATOR_FLOOR = 1e-12
ROW_CACHE_SIZE = 512

FloatArray = npt.NDArray[np.float64]
IntArray = npt.NDArray[np.int64]


@dataclass
class NgdDiagnostics:
    """Counters for degenerate cases met while computing distances."""

    clamped_denominators: int = 0
    empty_sentences: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def count_clamp(self) -> None:
        with self._lock:
            self.clamped_denominators += 1

    def count_empty(self) -> None:
        with self._lock:
            self.empty_sentences += 1

    def as_dict(self) -> dict[str, int]:
        return {
            "clamped_denominators": self.clamped_denominators,
            "empty_sentences": self.empty_sentences,
        }


class TermStats:
    """Document and co-document frequencies over a fixed vocabulary.

    Co-occurrence counts are computed on demand, either from per-term
    posting arrays (when built from documents) or from an explicit pair
    table (when loaded from a stats file), and memoized. Instances are safe
    to share between threads.
    """

    def __init__(
        self,
        vocab: Sequence[str],
        df: Sequence[int],
        n_total: int,
        postings: Sequence[IntArray] | None = None,
        doc_terms: Sequence[IntArray] | None = None,
        pairs: dict[int, dict[int, int]] | None = None,
    ) -> None:
        if n_total < 1:
            raise StatsError("reference collection is empty")
        self.vocab: tuple[str, ...] = tuple(vocab)
        self.index: dict[str, int] = {token: i for i, token in enumerate(self.vocab)}
        self.df: FloatArray = np.asarray(df, dtype=np.float64)
        self.n_total = n_total
        self.diagnostics = NgdDiagnostics()
        self._postings = postings
        self._doc_terms = doc_terms
        self._pairs = pairs if pairs is not None else {}
        self._co: dict[tuple[int, int], int] = {}
        self._rows: OrderedDict[str, FloatArray] = OrderedDict()
        self._lock = threading.Lock()

        with np.errstate(divide="ignore"):
            self._log_df: FloatArray = np.where(self.df > 0, np.log2(self.df), 0.0)

    def __len__(self) -> int:
        return len(self.vocab)

    def df_of(self, token: str) -> int:
        """Document frequency of token, 0 outside the vocabulary."""
        i = self.index.get(token)
        return 0 if i is None else int(self.df[i])

    def co_df(self, a: str, b: str) -> int:
        """Number of reference documents containing both tokens."""
        i, j = self.index.get(a), self.index.get(b)
        if i is None or j is None:
            return 0
        if i == j:
            return int(self.df[i])
        key = (i, j) if i < j else (j, i)
        with self._lock:
            cached = self._co.get(key)
        if cached is not None:
            return cached

        if self._postings is not None:
            count = len(np.intersect1d(self._postings[i], self._postings[j], assume_unique=True))
        else:
            count = self._pairs.get(key[0], {}).get(key[1], 0)

        with self._lock:
            self._co[key] = count
        return count

    def co_row(self, i: int) -> FloatArray:
        """Co-document counts of vocabulary term i against every term."""
        if self._postings is not None and self._doc_terms is not None:
            docs = self._postings[i]
            if len(docs) == 0:
                return np.zeros(len(self.vocab), dtype=np.float64)
            joined = np.concatenate([self._doc_terms[d] for d in docs])
            return np.bincount(joined, minlength=len(self.vocab)).astype(np.float64)

        row = np.zeros(len(self.vocab), dtype=np.float64)
        for j, count in self._pairs.get(i, {}).items():
            row[j] = count
        for k, partners in self._pairs.items():
            if k < i and i in partners:
                row[k] = partners[i]
        row[i] = self.df[i]
        return row

    def ngd_row(self, token: str) -> FloatArray:
        """NGD of token against every vocabulary term, in vocabulary order."""
        with self._lock:
            cached = self._rows.get(token)
            if cached is not None:
                self._rows.move_to_end(token)
                return cached

        row = self._compute_row(token)
        with self._lock:
            self._rows[token] = row
            if len(self._rows) > ROW_CACHE_SIZE:
                self._rows.popitem(last=False)
        return row

    def _compute_row(self, token: str) -> FloatArray:
        size = len(self.vocab)
        i = self.index.get(token)
        if i is None or self.df[i] == 0:
            row = np.ones(size, dtype=np.float64)
            if i is not None:
                row[i] = 0.0
            return row

        co = self.co_row(i)
        co = np.where(co > 0, co, 1.0)
        log_i = self._log_df[i]
        log_n = math.log2(self.n_total)

        numerator = np.maximum(log_i, self._log_df) - np.log2(co)
        denominator = log_n - np.minimum(log_i, self._log_df)
        clamped = denominator <= 0
        if clamped.any():
            self.diagnostics.count_clamp()
            denominator = np.where(clamped, DENOMINATOR_FLOOR, denominator)

        row = np.maximum(0.0, numerator / denominator)
        row[self.df == 0] = 1.0
        row[i] = 0.0
        return row


def build_term_stats(
    reference_docs: Iterable[Sequence[str]], vocab: Collection[str] | None = None
) -> TermStats:
    """Count document and co-document frequencies over reference documents.

    Args:
        reference_docs: Token sequences, one per reference document
        vocab: Tokens to track; defaults to every token seen

    Returns:
        Term statistics with n_total equal to the number of documents

    Raises:
        StatsError: If reference_docs is empty
    """
    docs = [frozenset(doc) for doc in reference_docs]
    if not docs:
        raise StatsError("reference collection is empty")

    if vocab is None:
        tokens = sorted({t for doc in docs for t in doc})
    else:
        tokens = sorted(set(vocab))
    index = {token: i for i, token in enumerate(tokens)}

    members: list[list[int]] = [[] for _ in tokens]
    doc_terms: list[IntArray] = []
    for d, doc in enumerate(docs):
        ids = sorted(index[t] for t in doc if t in index)
        for i in ids:
            members[i].append(d)
        doc_terms.append(np.asarray(ids, dtype=np.int64))

    postings = [np.asarray(m, dtype=np.int64) for m in members]
    df = [len(m) for m in members]

    logger.debug("term stats: %d documents, %d terms", len(docs), len(tokens))
    return TermStats(tokens, df, len(docs), postings=postings, doc_terms=doc_terms)


def ngd_term(stats: TermStats, t_i: str, t_j: str) -> float:
    """Normalized Google Distance between two terms.

    Identical terms are at distance 0 and a term with zero frequency is at
    distance 1. Two terms that never co-occur are evaluated as if they
    co-occurred once.

    Args:
        stats: Reference statistics with at least two documents
        t_i: First term
        t_j: Second term

    Returns:
        Nonnegative distance

    Raises:
        StatsError: If the reference collection has fewer than two documents
    """
    if stats.n_total < 2:
        raise StatsError(f"NGD needs at least 2 reference documents, got {stats.n_total}")
    if t_i == t_j:
        return 0.0

    f_i, f_j = stats.df_of(t_i), stats.df_of(t_j)
    if f_i == 0 or f_j == 0:
        return 1.0
    f_ij = max(stats.co_df(t_i, t_j), 1)

    log_i, log_j = math.log2(f_i), math.log2(f_j)
    numerator = max(log_i, log_j) - math.log2(f_ij)
    denominator = math.log2(stats.n_total) - min(log_i, log_j)
    if denominator <= 0:
        stats.diagnostics.count_clamp()
        denominator = DENOMINATOR_FLOOR
    return max(0.0, numerator / denominator)


def dis_ngd(stats: TermStats, s_a: Sequence[str], s_b: Sequence[str]) -> float:
    """Mean pairwise NGD between the tokens of two sentences.

    An empty sentence is at distance 1 from anything.
    """
    if not s_a or not s_b:
        stats.diagnostics.count_empty()
        return 1.0
    total = math.fsum(ngd_term(stats, a, b) for a in s_a for b in s_b)
    return total / (len(s_a) * len(s_b))


def dis_ngd_batch(
    stats: TermStats, query: Sequence[str], candidates: Sequence[Sequence[str]]
) -> list[float]:
    """Compute dis_ngd of one query against many sentences.

    The query's NGD rows are summed once; each candidate then costs a
    lookup per token.

    Args:
        stats: Reference statistics
        query: Query tokens
        candidates: Candidate token sequences

    Returns:
        Distances in candidate order
    """
    if stats.n_total < 2:
        raise StatsError(f"NGD needs at least 2 reference documents, got {stats.n_total}")
    if not query:
        for _ in candidates:
            stats.diagnostics.count_empty()
        return [1.0] * len(candidates)

    column_sums = np.zeros(len(stats.vocab), dtype=np.float64)
    for token in query:
        column_sums += stats.ngd_row(token)

    m_query = len(query)
    distances: list[float] = []
    for candidate in candidates:
        if not candidate:
            stats.diagnostics.count_empty()
            distances.append(1.0)
            continue
        total = 0.0
        for token in candidate:
            j = stats.index.get(token)
            if j is not None:
                total += float(column_sums[j])
            else:
                total += m_query - query.count(token)
        distances.append(total / (m_query * len(candidate)))
    return distances


def rank_by_dissimilarity(
    stats: TermStats, query: Sequence[str], candidates: Sequence[tuple[int, Sequence[str]]]
) -> list[tuple[int, float]]:
    """Order candidates by ascending dis_ngd to the query, ties by id."""
    distances = dis_ngd_batch(stats, query, [tokens for _, tokens in candidates])
    ranked = [(cid, d) for (cid, _), d in zip(candidates, distances, strict=True)]
    ranked.sort(key=lambda item: (item[1], item[0]))
    return ranked


def prune_count(n: int, x_percent: float) -> int:
    """Number of candidates kept when keeping the fraction x_percent of n.

    At least one candidate survives whenever n and x_percent are positive.
    """
    if n <= 0 or x_percent <= 0.0:
        return 0
    return min(n, max(1, math.ceil(x_percent * n - 1e-9)))


def prune_search_space(
    stats: TermStats,
    query: Sequence[str],
    candidates: Sequence[tuple[int, Sequence[str]]],
    x_percent: float,
) -> frozenset[int]:
    """Keep the candidates most similar to the query.

    Args:
        stats: Reference statistics
        query: Query tokens
        candidates: (id, tokens) pairs
        x_percent: Fraction of candidates to keep, in (0, 1]

    Returns:
        Ids of the ceil(x_percent * len(candidates)) least dissimilar candidates

    Raises:
        ValueError: If x_percent is outside (0, 1]
    """
    if not 0.0 < x_percent <= 1.0:
        raise ValueError(f"x_percent must be in (0, 1], got {x_percent}")
    if not candidates:
        return frozenset()
    ranked = rank_by_dissimilarity(stats, query, candidates)
    keep = prune_count(len(ranked), x_percent)
    return frozenset(cid for cid, _ in ranked[:keep])


def save_term_stats(stats: TermStats, path: str | Path) -> None:
    """Write statistics as ``#N``, ``token\\tdf`` and ``a\\tb\\tco`` lines."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"#N\t{stats.n_total}\n")
        for token in stats.vocab:
            f.write(f"{token}\t{stats.df_of(token)}\n")
        for i, token in enumerate(stats.vocab):
            row = stats.co_row(i)
            for j in np.nonzero(row)[0]:
                if j > i:
                    f.write(f"{token}\t{stats.vocab[j]}\t{int(row[j])}\n")


def load_term_stats(path: str | Path) -> TermStats:
    """Read statistics written by save_term_stats.

    Raises:
        IngestError: If the file is missing or malformed
    """
    name = str(path)
    n_total: int | None = None
    df: dict[str, int] = {}
    raw_pairs: list[tuple[str, str, int]] = []
    try:
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                fields = line.rstrip("\n").split("\t")
                try:
                    if fields[0] == "#N" and len(fields) == 2:
                        n_total = int(fields[1])
                    elif len(fields) == 2:
                        df[fields[0]] = int(fields[1])
                    elif len(fields) == 3:
                        raw_pairs.append((fields[0], fields[1], int(fields[2])))
                    elif line.strip():
                        raise ValueError("expected 2 or 3 tab-separated fields")
                except ValueError as e:
                    raise IngestError(str(e), name, line_no) from None
    except FileNotFoundError:
        raise IngestError("stats file not found", name) from None

    if n_total is None:
        raise IngestError("missing '#N' header", name)

    vocab = sorted(df)
    index = {token: i for i, token in enumerate(vocab)}
    pairs: dict[int, dict[int, int]] = {}
    for a, b, count in raw_pairs:
        if a not in index or b not in index:
            raise IngestError(f"pair ({a}, {b}) uses a token without a df line", name)
        i, j = sorted((index[a], index[b]))
        pairs.setdefault(i, {})[j] = count

    return TermStats(vocab, [df[t] for t in vocab], n_total, pairs=pairs)
