"""Candidate selection blending IR ranking with NGD similarity."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

from pivotex.errors import ConfigError
from pivotex.ir import IrHit
from pivotex.ngd import prune_count


SelectionMode = Literal["union", "intersection", "plain"]

SELECTION_MODES: tuple[SelectionMode, ...] = ("union", "intersection")


@dataclass(frozen=True)
class Candidate:
    """A target-side sentence proposed for one query.

    Attributes:
        sentence_id: Target-side sentence id
        ir_score: BM25 score against the query
        ngd_value: Sentence dissimilarity to the query, None when NGD is off
        combined_score: Blended ranking score, higher is better
    """

    sentence_id: int
    ir_score: float
    ngd_value: float | None
    combined_score: float


@dataclass(frozen=True)
class CandidateSet:
    """Candidates for one query, by descending combined score then id."""

    query_id: int
    candidates: tuple[Candidate, ...]
    mode: SelectionMode

    def __len__(self) -> int:
        return len(self.candidates)

    def ids(self) -> list[int]:
        return [c.sentence_id for c in self.candidates]


def combined_score(ir_score: float, ngd_value: float, lam: float, max_ir: float) -> float:
    """Blend a retrieval score with an NGD dissimilarity.

    The retrieval score is rescaled by the best score of the current result
    list; a zero maximum rescales everything to 0.

    Args:
        ir_score: BM25 score
        ngd_value: Sentence dissimilarity, values above 1 count as 1
        lam: Weight of the NGD similarity, in [0, 1]
        max_ir: Largest BM25 score among the results being ranked

    Returns:
        Score in [0, 1], higher is better
    """
    norm = ir_score / max_ir if max_ir > 0 else 0.0
    return (1.0 - lam) * norm + lam * (1.0 - min(ngd_value, 1.0))


def _sorted(candidates: Sequence[Candidate]) -> tuple[Candidate, ...]:
    return tuple(sorted(candidates, key=lambda c: (-c.combined_score, c.sentence_id)))


def plain_candidates(query_id: int, ir_hits: Sequence[IrHit]) -> CandidateSet:
    """Wrap plain IR hits as candidates ranked by rescaled BM25 score."""
    max_ir = max((hit.ir_score for hit in ir_hits), default=0.0)
    candidates = [
        Candidate(
            sentence_id=hit.sentence_id,
            ir_score=hit.ir_score,
            ngd_value=None,
            combined_score=hit.ir_score / max_ir if max_ir > 0 else 0.0,
        )
        for hit in ir_hits
    ]
    return CandidateSet(query_id, _sorted(candidates), "plain")


def select_candidates(
    query_id: int,
    ir_hits: Sequence[IrHit],
    ngd_ranked: Sequence[tuple[int, float]],
    n_top_ngd: int = 5,
    m_top_ir: int = 7,
    mode: SelectionMode = "union",
    lam: float = 0.5,
    x_percent: float = 0.4,
    extra_ir_scores: Mapping[int, float] | None = None,
) -> CandidateSet:
    """Build the candidate set of one query from its IR hits and NGD ranking.

    In union mode the set is the N least dissimilar in-window sentences
    together with the M best hits under the blended score. In intersection
    mode it is the blended top M restricted to the least dissimilar
    x_percent of in-window sentences.

    Args:
        query_id: Source-side sentence id
        ir_hits: Hits retrieved from the (pruned) search space
        ngd_ranked: In-window (id, dissimilarity) pairs, ascending
        n_top_ngd: N, sentences taken from the NGD ranking
        m_top_ir: M, sentences taken from the blended IR ranking
        mode: "union" or "intersection"
        lam: Weight of NGD similarity in the blend
        x_percent: Fraction of the NGD ranking admissible in intersection mode
        extra_ir_scores: BM25 scores of NGD-only candidates missing from ir_hits

    Returns:
        Candidate set carrying BM25, NGD and blended scores

    Raises:
        ConfigError: If a count is below 1, lam is outside [0, 1] or mode is unknown
    """
    if n_top_ngd < 1 or m_top_ir < 1:
        raise ConfigError(f"n_top_ngd and m_top_ir must be at least 1, got {n_top_ngd}, {m_top_ir}")
    if not 0.0 <= lam <= 1.0:
        raise ConfigError(f"lambda must be in [0, 1], got {lam}")
    if mode not in SELECTION_MODES:
        raise ConfigError(f"unknown selection mode '{mode}'")

    ngd_of = dict(ngd_ranked)
    ir_of = dict(extra_ir_scores or {})
    ir_of.update((hit.sentence_id, hit.ir_score) for hit in ir_hits)
    max_ir = max(ir_of.values(), default=0.0)

    def candidate(sentence_id: int) -> Candidate:
        ir_score = ir_of.get(sentence_id, 0.0)
        ngd_value = ngd_of.get(sentence_id, 1.0)
        return Candidate(
            sentence_id=sentence_id,
            ir_score=ir_score,
            ngd_value=ngd_value,
            combined_score=combined_score(ir_score, ngd_value, lam, max_ir),
        )

    modified = sorted(
        (candidate(hit.sentence_id) for hit in ir_hits),
        key=lambda c: (-c.combined_score, c.sentence_id),
    )
    top_ir = {c.sentence_id for c in modified[:m_top_ir]}

    if mode == "union":
        top_ngd = {sentence_id for sentence_id, _ in ngd_ranked[:n_top_ngd]}
        chosen = top_ir | top_ngd
    else:
        keep = prune_count(len(ngd_ranked), x_percent)
        chosen = top_ir & {sentence_id for sentence_id, _ in ngd_ranked[:keep]}

    return CandidateSet(query_id, _sorted([candidate(i) for i in chosen]), mode)
