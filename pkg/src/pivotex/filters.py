"""Final pair filtering: metric scoring, inverted translation and tail removal."""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Literal

from pivotex.corpus import Sentence
from pivotex.errors import ConfigError, MetricError
from pivotex.metrics import (
    METRICS,
    MetricName,
    MetricScore,
    TerpResources,
    TerpWeights,
    levenshtein_alignment,
    score,
)
from pivotex.translate import TranslationAdapter, TranslationHypothesis, translate_sentence


logger = logging.getLogger(__name__)

FilterMode = Literal["candidate", "inverted"]
FILTER_MODES: tuple[FilterMode, ...] = ("candidate", "inverted")

SelectedBy = Literal["candidate-filter", "inverted-translation"]


@dataclass(frozen=True)
class ScoredPair:
    """A source/target sentence pair with its filter score.

    Attributes:
        source_id: Source-side sentence id
        target_id: Target-side sentence id
        metric: Metric used for scoring
        score: Filter score, lower is better
        selected_by: Filter that produced the pair
        hypotheses: Number of n-best hypotheses summed (inverted translation)
        source_span: Kept [start, end) of the source pivot tokens
        target_span: Kept [start, end) of the target pivot tokens
    """

    source_id: int
    target_id: int
    metric: MetricName
    score: float
    selected_by: SelectedBy = "candidate-filter"
    hypotheses: int = 1
    source_span: tuple[int, int] | None = None
    target_span: tuple[int, int] | None = None

    @property
    def ids(self) -> tuple[int, int]:
        return self.source_id, self.target_id


@dataclass(frozen=True)
class MetricScorer:
    """A metric bound to its TERp resources and weights."""

    metric: MetricName = "ter"
    resources: TerpResources = field(default_factory=TerpResources)
    weights: TerpWeights = field(default_factory=TerpWeights)

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric '{self.metric}', expected one of {', '.join(METRICS)}")

    def __call__(self, hyp: Sequence[str], ref: Sequence[str]) -> MetricScore:
        return score(self.metric, hyp, ref, self.resources, self.weights)


@dataclass(frozen=True)
class TailTrim:
    """Result of tail removal on one pair.

    Attributes:
        source_end: Number of source pivot tokens kept
        target_end: Number of target pivot tokens kept
        source_length: Source pivot token count
        target_length: Target pivot token count
    """

    source_end: int
    target_end: int
    source_length: int
    target_length: int

    @property
    def trimmed(self) -> bool:
        return self.source_end < self.source_length or self.target_end < self.target_length


def best_candidate(
    query_id: int,
    query: Sequence[str],
    candidates: Iterable[tuple[int, Sequence[str]]],
    scorer: MetricScorer,
) -> ScoredPair | None:
    """Pick the candidate whose pivot translation best matches the query.

    The query is the hypothesis and each candidate the reference. Candidates
    without tokens cannot serve as a reference and are skipped.

    Args:
        query_id: Source-side sentence id
        query: Source pivot tokens
        candidates: (target id, target pivot tokens) pairs
        scorer: Metric to minimize

    Returns:
        Lowest-scoring candidate, ties by lowest id, or None
    """
    best: ScoredPair | None = None
    for target_id, tokens in sorted(candidates, key=lambda c: c[0]):
        if not tokens:
            continue
        value = scorer(query, tokens).value
        if best is None or value < best.score:
            best = ScoredPair(query_id, target_id, scorer.metric, value)
    return best


def sum_hypothesis_scores(
    hypotheses: Sequence[TranslationHypothesis], candidate: Sequence[str], scorer: MetricScorer
) -> float:
    """Sum the metric of every n-best hypothesis against one candidate."""
    if not candidate:
        raise MetricError("empty reference")
    return math.fsum(scorer(h.tokens, candidate).value for h in hypotheses)


def inverted_translation_score(
    src_sentence: Sentence,
    candidate: Sentence,
    st_adapter: TranslationAdapter,
    n: int,
    scorer: MetricScorer,
    seed: int = 0,
) -> tuple[float, int]:
    """Score a candidate against the direct n-best translations of the source.

    Args:
        src_sentence: Original source sentence
        candidate: Original target sentence
        st_adapter: Source-to-target adapter
        n: Requested n-best size
        scorer: Metric applied to each hypothesis

    Returns:
        Summed metric value and the number of hypotheses summed

    Raises:
        TranslationError: If the adapter fails
        MetricError: If the candidate has no tokens
    """
    hypotheses = translate_sentence(st_adapter, src_sentence, n, seed)
    return sum_hypothesis_scores(hypotheses, candidate.tokens, scorer), len(hypotheses)


def best_inverted(
    source_id: int,
    hypotheses: Sequence[TranslationHypothesis],
    candidates: Iterable[tuple[int, Sequence[str]]],
    scorer: MetricScorer,
) -> ScoredPair | None:
    """Pick the candidate with the lowest inverted-translation score.

    Args:
        source_id: Source-side sentence id
        hypotheses: n-best direct translations of the source sentence
        candidates: (target id, original target tokens) pairs
        scorer: Metric applied per hypothesis

    Returns:
        Best pair, ties by lowest id, or None
    """
    best: ScoredPair | None = None
    for target_id, tokens in sorted(candidates, key=lambda c: c[0]):
        if not tokens:
            continue
        value = sum_hypothesis_scores(hypotheses, tokens, scorer)
        if best is None or value < best.score:
            best = ScoredPair(
                source_id,
                target_id,
                scorer.metric,
                value,
                selected_by="inverted-translation",
                hypotheses=len(hypotheses),
            )
    return best


def tail_removal(src_pivot: Sequence[str], tgt_pivot: Sequence[str], max_tail: float) -> TailTrim:
    """Trim unaligned trailing tokens from a pair.

    The source is aligned to the target with the WER edit script. A side
    loses the tokens after its last matched token when that suffix is longer
    than max_tail times its length. Pairs without any match are unchanged.

    Args:
        src_pivot: Source pivot tokens
        tgt_pivot: Target pivot tokens
        max_tail: Tolerated tail fraction in [0, 1]

    Returns:
        Kept lengths of both sides

    Raises:
        ValueError: If max_tail is outside [0, 1]
    """
    if not 0.0 <= max_tail <= 1.0:
        raise ValueError(f"max_tail must be in [0, 1], got {max_tail}")

    src_len, tgt_len = len(src_pivot), len(tgt_pivot)
    alignment = levenshtein_alignment(src_pivot, tgt_pivot)
    src_matches = alignment.matched_hyp_positions()
    tgt_matches = alignment.matched_ref_positions()
    if not src_matches:
        return TailTrim(src_len, tgt_len, src_len, tgt_len)

    src_end = max(src_matches) + 1
    tgt_end = max(tgt_matches) + 1
    if src_len - src_end <= max_tail * src_len:
        src_end = src_len
    if tgt_len - tgt_end <= max_tail * tgt_len:
        tgt_end = tgt_len
    return TailTrim(src_end, tgt_end, src_len, tgt_len)


def accept_pairs(scored: Iterable[ScoredPair], threshold: float | None) -> list[ScoredPair]:
    """Keep pairs scoring at most threshold, best first.

    Args:
        scored: Candidate pairs
        threshold: Score cutoff, None keeps everything

    Returns:
        Accepted pairs by ascending score, then source id, then target id
    """
    kept = [p for p in scored if threshold is None or p.score <= threshold]
    kept.sort(key=lambda p: (p.score, p.source_id, p.target_id))
    return kept
