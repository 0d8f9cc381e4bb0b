"""Slow, literal re-implementations used to cross-check the fast code paths."""

import math
from collections.abc import Sequence
from functools import lru_cache


def brute_force_edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Recursive Levenshtein distance."""
    a, b = tuple(hyp), tuple(ref)

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        same = go(i - 1, j - 1) + (0 if a[i - 1] == b[j - 1] else 1)
        return min(same, go(i - 1, j) + 1, go(i, j - 1) + 1)

    return go(len(a), len(b))


def all_block_moves(tokens: tuple[str, ...], max_length: int = 10) -> set[tuple[str, ...]]:
    """Every sequence reachable from tokens by moving one contiguous block."""
    moved: set[tuple[str, ...]] = set()
    for start in range(len(tokens)):
        for length in range(1, min(max_length, len(tokens) - start) + 1):
            block = tokens[start : start + length]
            rest = tokens[:start] + tokens[start + length :]
            for dest in range(len(rest) + 1):
                candidate = rest[:dest] + block + rest[dest:]
                if candidate != tokens:
                    moved.add(candidate)
    return moved


def optimal_shift_cost(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Lowest shifts + edit distance over every sequence of block moves.

    A sequence of d moves costs at least d, so depths up to the best cost seen
    cover every possible improvement.
    """
    best = brute_force_edit_distance(hyp, ref)
    frontier = {tuple(hyp)}
    depth = 0
    while depth + 1 < best:
        depth += 1
        reached: set[tuple[str, ...]] = set()
        for tokens in frontier:
            reached |= all_block_moves(tokens)
        for tokens in reached:
            best = min(best, depth + brute_force_edit_distance(tokens, ref))
        frontier = reached
    return best


def bm25_reference(
    documents: dict[int, Sequence[str]],
    query: Sequence[str],
    doc_id: int,
    k1: float = 1.2,
    b: float = 0.75,
) -> float:
    """BM25 by looping over every document for every query term."""
    n_docs = len(documents)
    avg_len = sum(len(d) for d in documents.values()) / n_docs
    doc = documents[doc_id]
    total = 0.0
    for term in dict.fromkeys(query):
        containing = sum(1 for d in documents.values() if term in d)
        if containing == 0:
            continue
        idf = max(0.0, math.log(1 + (n_docs - containing + 0.5) / (containing + 0.5)))
        tf = doc.count(term)
        norm = 1 - b + b * len(doc) / avg_len
        total += idf * tf * (k1 + 1) / (tf + k1 * norm)
    return total


def ngd_reference(documents: Sequence[set[str]], a: str, b: str) -> float:
    """NGD straight from document membership, base-2 logarithms."""
    if a == b:
        return 0.0
    n_total = len(documents)
    f_a = sum(1 for d in documents if a in d)
    f_b = sum(1 for d in documents if b in d)
    if f_a == 0 or f_b == 0:
        return 1.0
    f_ab = max(1, sum(1 for d in documents if a in d and b in d))
    numerator = max(math.log2(f_a), math.log2(f_b)) - math.log2(f_ab)
    denominator = math.log2(n_total) - min(math.log2(f_a), math.log2(f_b))
    return max(0.0, numerator / max(denominator, 1e-12))


def dis_ngd_reference(documents: Sequence[set[str]], s_a: Sequence[str], s_b: Sequence[str]) -> float:
    """Mean pairwise NGD with a double loop."""
    if not s_a or not s_b:
        return 1.0
    total = sum(ngd_reference(documents, x, y) for x in s_a for y in s_b)
    return total / (len(s_a) * len(s_b))
