"""End-to-end extraction: translate, index, prune, retrieve, select, filter, rank."""

import json
import logging
import time
from collections.abc import Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Literal

from tqdm import tqdm

from pivotex.corpus import (
    ComparableCorpus,
    CorpusSide,
    PivotSentence,
    StopWordList,
    default_stop_words,
    remove_stop_words,
)
from pivotex.errors import ConfigError
from pivotex.filters import (
    FILTER_MODES,
    FilterMode,
    MetricScorer,
    ScoredPair,
    accept_pairs,
    best_candidate,
    best_inverted,
    tail_removal,
)
from pivotex.ir import InvertedIndex, bm25_score, build_index, query_window
from pivotex.metrics import METRICS, MetricName, TerpResources, TerpWeights
from pivotex.ngd import TermStats, build_term_stats, prune_count, rank_by_dissimilarity
from pivotex.selection import (
    SELECTION_MODES,
    CandidateSet,
    SelectionMode,
    plain_candidates,
    select_candidates,
)
from pivotex.translate import TranslationAdapter, TranslationHypothesis, translate_corpus


logger = logging.getLogger(__name__)

NgdReference = Literal["target", "both"]

PLAIN_WINDOW_DAYS = 5
PRUNED_WINDOW_DAYS = 7
PLAIN_TOP_K = 5
MODIFIED_TOP_K = 10


@dataclass(frozen=True)
class PipelineConfig:
    """Tunables of one extraction run.

    ``window_days`` and ``top_k_ir`` default to None and resolve to the plain
    values (5 days, 5 hits) or, with NGD pruning or modified IR switched on,
    to 7 days and 10 hits.

    With ``direct`` set, source sentences are translated straight into the
    target language and retrieval runs over the untranslated target side; no
    pivot language is involved.
    """

    window_days: int | None = None
    direct: bool = False
    ngd_pruning: bool = False
    modified_ir: bool = False
    x_percent: float = 0.4
    n_top_ngd: int = 5
    m_top_ir: int = 7
    top_k_ir: int | None = None
    lam: float = 0.5
    mode: SelectionMode = "union"
    metric: MetricName = "ter"
    filter_mode: FilterMode = "candidate"
    n_best_inverted: int = 5
    max_tail: float = 0.3
    threshold: float | None = None
    top_p_output: float = 0.5
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    seed: int = 0
    jobs: int = 1
    one_to_one: bool = False
    ngd_reference: NgdReference = "target"
    terp_weights: TerpWeights = field(default_factory=TerpWeights)

    @property
    def uses_ngd(self) -> bool:
        return self.ngd_pruning or self.modified_ir

    @property
    def needs_st_adapter(self) -> bool:
        """Whether the run translates source sentences directly into the target language."""
        return self.direct or self.filter_mode == "inverted"

    def validate(self) -> None:
        """Check ranges and choices.

        Raises:
            ConfigError: On the first invalid setting found
        """
        counts = {
            "n_top_ngd": self.n_top_ngd,
            "m_top_ir": self.m_top_ir,
            "n_best_inverted": self.n_best_inverted,
            "jobs": self.jobs,
        }
        if self.top_k_ir is not None:
            counts["top_k_ir"] = self.top_k_ir
        for name, value in counts.items():
            if value < 1:
                raise ConfigError(f"{name} must be at least 1, got {value}")

        for name, fraction in (("x_percent", self.x_percent), ("top_p_output", self.top_p_output)):
            if not 0.0 < fraction <= 1.0:
                raise ConfigError(f"{name} must be in (0, 1], got {fraction}")

        if self.window_days is not None and self.window_days < 0:
            raise ConfigError(f"window_days must be non-negative, got {self.window_days}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")
        if not 0.0 <= self.max_tail <= 1.0:
            raise ConfigError(f"max_tail must be in [0, 1], got {self.max_tail}")
        if self.threshold is not None and self.threshold < 0:
            raise ConfigError(f"threshold must be non-negative, got {self.threshold}")
        if self.bm25_k1 < 0 or not 0.0 <= self.bm25_b <= 1.0:
            raise ConfigError(f"invalid BM25 parameters k1={self.bm25_k1}, b={self.bm25_b}")
        if self.mode not in SELECTION_MODES:
            raise ConfigError(f"unknown selection mode '{self.mode}'")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric '{self.metric}'")
        if self.filter_mode not in FILTER_MODES:
            raise ConfigError(f"unknown filter mode '{self.filter_mode}'")
        if self.ngd_reference not in ("target", "both"):
            raise ConfigError(f"unknown NGD reference '{self.ngd_reference}'")

    def resolved(self) -> "PipelineConfig":
        """Return a copy with window_days and top_k_ir filled in."""
        window = self.window_days
        if window is None:
            window = PRUNED_WINDOW_DAYS if self.ngd_pruning else PLAIN_WINDOW_DAYS
        top_k = self.top_k_ir
        if top_k is None:
            top_k = MODIFIED_TOP_K if self.modified_ir else PLAIN_TOP_K
        return replace(self, window_days=window, top_k_ir=top_k)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class StageCounters:
    """Per-stage counts of one run.

    The query-level counters count source sentences still alive after each
    stage; the ``*_total`` counters add up per-query set sizes.
    """

    translated_source: int = 0
    translated_target: int = 0
    queries: int = 0
    in_window: int = 0
    pruned: int = 0
    retrieved: int = 0
    selected: int = 0
    filtered: int = 0
    tail_trimmed: int = 0
    ranked: int = 0
    emitted: int = 0
    in_window_total: int = 0
    pruned_total: int = 0
    retrieved_total: int = 0
    selected_total: int = 0

    def is_monotone(self) -> bool:
        """Whether no stage reports more survivors than its input."""
        chain = [
            self.translated_source,
            self.queries,
            self.in_window,
            self.pruned,
            self.selected,
            self.filtered,
            self.ranked,
            self.emitted,
        ]
        ordered = all(a >= b for a, b in zip(chain, chain[1:], strict=False))
        return (
            ordered
            and self.retrieved <= self.pruned
            and self.tail_trimmed <= self.filtered
            and self.pruned_total <= self.in_window_total
            and self.retrieved_total <= self.pruned_total
        )

    def as_stages(self) -> list[tuple[str, int]]:
        """Query-level counters in stage order, for display."""
        return [
            ("translated", self.translated_source),
            ("in-window", self.in_window),
            ("pruned", self.pruned),
            ("retrieved", self.retrieved),
            ("selected", self.selected),
            ("filtered", self.filtered),
            ("tail-trimmed", self.tail_trimmed),
            ("emitted", self.emitted),
        ]


@dataclass
class ExtractionReport:
    """Summary of one extraction run."""

    counters: StageCounters = field(default_factory=StageCounters)
    timings: dict[str, float] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    ngd_enabled: bool = False
    ngd_diagnostics: dict[str, int] = field(default_factory=dict)
    index: InvertedIndex | None = field(default=None, repr=False, compare=False)

    @property
    def pairs_emitted(self) -> int:
        return self.counters.emitted

    def to_dict(self, include_timings: bool = True) -> dict[str, Any]:
        result: dict[str, Any] = {
            "pairs_emitted": self.pairs_emitted,
            "counters": asdict(self.counters),
            "config": self.config,
            "ngd_enabled": self.ngd_enabled,
            "ngd_diagnostics": self.ngd_diagnostics,
        }
        if include_timings:
            result["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return result


@dataclass(frozen=True)
class _QueryOutcome:
    in_window: int
    pruned: int
    retrieved: int
    selected: int
    pair: ScoredPair | None
    trimmed: bool


@contextmanager
def _timed(timings: dict[str, float], stage: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[stage] = timings.get(stage, 0.0) + time.perf_counter() - start


def _pivot_sentences(
    corpus_side: CorpusSide, translations: Mapping[int, Sequence[TranslationHypothesis]]
) -> dict[int, PivotSentence]:
    return {
        s.id: PivotSentence(s.id, s.date, translations[s.id][0].tokens) for s in corpus_side
    }


def _drop_empty(pivots: dict[int, PivotSentence], side: str) -> dict[int, PivotSentence]:
    kept = {i: p for i, p in pivots.items() if p.tokens}
    if len(kept) < len(pivots):
        logger.warning(
            "skipping %d %s sentences whose translation is empty", len(pivots) - len(kept), side
        )
    return kept


def _build_stats(
    cfg: PipelineConfig,
    source_pivots: Mapping[int, PivotSentence],
    target_pivots: Mapping[int, PivotSentence],
    stops: StopWordList,
) -> TermStats | None:
    docs = [remove_stop_words(p.tokens, stops) for p in target_pivots.values()]
    if cfg.ngd_reference == "both":
        docs += [remove_stop_words(p.tokens, stops) for p in source_pivots.values()]
    if len(docs) < 2:
        logger.warning("NGD needs at least 2 reference documents, got %d; NGD disabled", len(docs))
        return None
    vocab = {t for p in (*source_pivots.values(), *target_pivots.values()) for t in p.tokens}
    return build_term_stats(docs, vocab={t for t in vocab if t not in stops})


def top_fraction(pairs: Sequence[ScoredPair], fraction: float) -> list[ScoredPair]:
    """Keep the best ceil(fraction * n) pairs of an already ranked list."""
    return list(pairs[: prune_count(len(pairs), fraction)])


def one_to_one(pairs: Sequence[ScoredPair]) -> list[ScoredPair]:
    """Greedy assignment: in ranked order, each target id is used once."""
    used: set[int] = set()
    kept: list[ScoredPair] = []
    for pair in pairs:
        if pair.target_id in used:
            continue
        used.add(pair.target_id)
        kept.append(pair)
    return kept


def run_extraction(
    corpus: ComparableCorpus,
    src_adapter: TranslationAdapter,
    tgt_adapter: TranslationAdapter,
    st_adapter: TranslationAdapter | None = None,
    cfg: PipelineConfig | None = None,
    stops: StopWordList | None = None,
    resources: TerpResources | None = None,
    index: InvertedIndex | None = None,
    progress: bool = False,
) -> tuple[list[ScoredPair], ExtractionReport]:
    """Extract parallel sentence pairs from a comparable corpus.

    Args:
        corpus: Source and target sides
        src_adapter: Source-to-pivot adapter, unused by direct retrieval
        tgt_adapter: Target-to-pivot adapter, unused by direct retrieval
        st_adapter: Source-to-target adapter, required by direct retrieval and
            inverted filtering
        cfg: Run configuration
        stops: Pivot stop words, built-in English list by default
        resources: TERp resources
        index: Prebuilt index over the side searched by this run (e.g. from a cache)
        progress: Show progress bars

    Returns:
        Accepted pairs by ascending score and the run report

    Raises:
        ConfigError: If the configuration is invalid or inconsistent
        TranslationError: If an adapter fails
    """
    config = (cfg if cfg is not None else PipelineConfig()).resolved()
    config.validate()
    if config.needs_st_adapter != (st_adapter is not None):
        raise ConfigError(
            "a source-to-target adapter is required for direct retrieval or inverted "
            "filtering, and only then"
        )
    window_days = config.window_days if config.window_days is not None else PLAIN_WINDOW_DAYS
    top_k = config.top_k_ir if config.top_k_ir is not None else PLAIN_TOP_K

    stop_list = stops if stops is not None else default_stop_words()
    scorer = MetricScorer(
        config.metric,
        resources if resources is not None else TerpResources(),
        config.terp_weights,
    )
    report = ExtractionReport(config=config.to_dict())
    counters = report.counters
    timings = report.timings
    source_side, target_side = corpus.source_side, corpus.target_side

    with _timed(timings, "translate"):
        st_translations: dict[int, list[TranslationHypothesis]] = {}
        if st_adapter is not None:
            n_best = config.n_best_inverted if config.filter_mode == "inverted" else 1
            st_translations = translate_corpus(
                st_adapter, source_side, n_best, config.seed, config.jobs, progress
            )
        if config.direct:
            source_pivots = _pivot_sentences(source_side, st_translations)
            target_pivots = {s.id: PivotSentence(s.id, s.date, s.tokens) for s in target_side}
        else:
            src_translations = translate_corpus(
                src_adapter, source_side, 1, config.seed, config.jobs, progress
            )
            tgt_translations = translate_corpus(
                tgt_adapter, target_side, 1, config.seed, config.jobs, progress
            )
            source_pivots = _pivot_sentences(source_side, src_translations)
            target_pivots = _pivot_sentences(target_side, tgt_translations)
    counters.translated_source = len(source_pivots)
    counters.translated_target = len(target_pivots)
    source_pivots = _drop_empty(source_pivots, "source")
    target_pivots = _drop_empty(target_pivots, "target")

    with _timed(timings, "index"):
        if index is None:
            index = build_index(target_pivots.values(), stop_list, config.bm25_k1, config.bm25_b)
    built_index = index
    report.index = index

    stats: TermStats | None = None
    if config.uses_ngd:
        with _timed(timings, "stats"):
            stats = _build_stats(config, source_pivots, target_pivots, stop_list)
    report.ngd_enabled = stats is not None
    target_content = {i: remove_stop_words(p.tokens, stop_list) for i, p in target_pivots.items()}

    def process(query: PivotSentence) -> _QueryOutcome:
        window_ids = built_index.ids_in_window(query.date, window_days)
        candidates: CandidateSet
        pruned_count = len(window_ids)

        if stats is None:
            hits = query_window(built_index, query, window_days, top_k)
            candidates = plain_candidates(query.id, hits)
        else:
            content = remove_stop_words(query.tokens, stop_list)
            ranked = rank_by_dissimilarity(
                stats, content, [(i, target_content[i]) for i in window_ids]
            )
            if config.ngd_pruning:
                ranked = ranked[: prune_count(len(ranked), config.x_percent)]
            pruned_count = len(ranked)
            space = frozenset(i for i, _ in ranked)
            hits = query_window(
                built_index, query, window_days, top_k, space
            )
            if config.modified_ir:
                hit_ids = {h.sentence_id for h in hits}
                extra = {
                    i: bm25_score(built_index, query.tokens, i)
                    for i, _ in ranked[: config.n_top_ngd]
                    if i not in hit_ids
                }
                candidates = select_candidates(
                    query.id,
                    hits,
                    ranked,
                    n_top_ngd=config.n_top_ngd,
                    m_top_ir=config.m_top_ir,
                    mode=config.mode,
                    lam=config.lam,
                    x_percent=1.0 if config.ngd_pruning else config.x_percent,
                    extra_ir_scores=extra,
                )
            else:
                candidates = plain_candidates(query.id, hits)

        if config.filter_mode == "inverted":
            pair = best_inverted(
                query.id,
                st_translations[query.id],
                [(i, target_side.sentence(i).tokens) for i in candidates.ids()],
                scorer,
            )
        else:
            pair = best_candidate(
                query.id,
                query.tokens,
                [(i, target_pivots[i].tokens) for i in candidates.ids()],
                scorer,
            )

        trimmed = False
        if pair is not None:
            trim = tail_removal(query.tokens, target_pivots[pair.target_id].tokens, config.max_tail)
            trimmed = trim.trimmed
            pair = replace(
                pair, source_span=(0, trim.source_end), target_span=(0, trim.target_end)
            )

        return _QueryOutcome(
            in_window=len(window_ids),
            pruned=pruned_count,
            retrieved=len(hits),
            selected=len(candidates),
            pair=pair,
            trimmed=trimmed,
        )

    queries = [source_pivots[s.id] for s in source_side if s.id in source_pivots]
    counters.queries = len(queries)
    outcomes: list[_QueryOutcome] = []
    with _timed(timings, "queries"):
        bar = tqdm(total=len(queries), desc="Matching", disable=not progress)
        with bar:
            if config.jobs > 1:
                with ThreadPoolExecutor(max_workers=config.jobs) as pool:
                    for outcome in pool.map(process, queries):
                        outcomes.append(outcome)
                        bar.update(1)
            else:
                for query in queries:
                    outcomes.append(process(query))
                    bar.update(1)

    for outcome in outcomes:
        counters.in_window += outcome.in_window > 0
        counters.pruned += outcome.pruned > 0
        counters.retrieved += outcome.retrieved > 0
        counters.selected += outcome.selected > 0
        counters.filtered += outcome.pair is not None
        counters.tail_trimmed += outcome.trimmed
        counters.in_window_total += outcome.in_window
        counters.pruned_total += outcome.pruned
        counters.retrieved_total += outcome.retrieved
        counters.selected_total += outcome.selected

    with _timed(timings, "rank"):
        best = accept_pairs((o.pair for o in outcomes if o.pair is not None), None)
        if config.one_to_one:
            best = one_to_one(best)
        counters.ranked = len(best)
        accepted = accept_pairs(top_fraction(best, config.top_p_output), config.threshold)
    counters.emitted = len(accepted)

    if stats is not None:
        report.ngd_diagnostics = stats.diagnostics.as_dict()
    logger.info(
        "extracted %d pairs from %d source sentences", counters.emitted, counters.queries
    )
    return accepted, report


def _clean(text: str) -> str:
    return " ".join(text.replace("\t", " ").splitlines())


def report_path(path: str | Path) -> Path:
    """Location of the report written next to an output corpus."""
    return Path(f"{path}.report.json")


def emit_corpus(
    pairs: Sequence[ScoredPair],
    corpus: ComparableCorpus,
    path: str | Path,
    report: ExtractionReport | None = None,
    with_spans: bool = False,
) -> None:
    """Write accepted pairs as TSV and the run report as JSON.

    Lines are ``source_id, target_id, score, source_text, target_text``,
    tab-separated, with two more columns holding the kept pivot span lengths
    when with_spans is set. The report goes to ``<path>.report.json``.

    Raises:
        OSError: If a file cannot be written
    """
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for pair in pairs:
            source = corpus.source_side.sentence(pair.source_id)
            target = corpus.target_side.sentence(pair.target_id)
            fields = [
                str(pair.source_id),
                str(pair.target_id),
                f"{pair.score:.6f}",
                _clean(source.text),
                _clean(target.text),
            ]
            if with_spans:
                fields.append(str(pair.source_span[1] if pair.source_span else len(source.tokens)))
                fields.append(str(pair.target_span[1] if pair.target_span else len(target.tokens)))
            f.write("\t".join(fields) + "\n")

    if report is not None:
        with open(report_path(path), "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
