"""Synthetic comparable corpora with gold alignments, and extraction scoring."""

import csv
import json
import logging
import random
import time
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import date, timedelta
from pathlib import Path
from typing import Any, Literal

from pivotex.corpus import (
    ComparableCorpus,
    CorpusSide,
    RawDocument,
    StopWordList,
    build_side,
    dump_side,
    parse_day,
)
from pivotex.errors import ConfigError, ExtractionError, IngestError
from pivotex.filters import ScoredPair
from pivotex.metrics import TerpResources
from pivotex.pipeline import PipelineConfig, run_extraction
from pivotex.translate import ProbDictionary, TranslationAdapter, save_dictionary


logger = logging.getLogger(__name__)

Comparability = Literal["high", "low"]

AMBIGUOUS_PRIMARY = 0.7
MAX_DRAW_ATTEMPTS = 1000
COMPARISON_HEADER = ("label", "precision", "recall", "f1", "pairs", "seconds")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic comparable corpus.

    Attributes:
        n_parallel: Planted parallel pairs
        n_distractors_per_side: Non-parallel sentences added to each side
        date_jitter_days: Largest date offset between the two halves of a pair
        noise_rate: Probability that a planted target token is replaced
        comparability: "high" when target distractors follow the source topic
            schedule, "low" when their topics are drawn independently
        seed: Random seed
        span_days: Number of distinct publication days
        n_topics: Number of topics
        topic_size: Concepts per topic
        vocab_size: Total number of concepts
        topic_share: Probability that a sentence token comes from its topic
        min_length: Shortest sentence in tokens
        max_length: Longest sentence in tokens
        ambiguity: Fraction of concepts whose source word gets a second translation
        start_date: First publication day
        source_lang: Source language tag
        target_lang: Target language tag
    """

    n_parallel: int = 100
    n_distractors_per_side: int = 900
    date_jitter_days: int = 0
    noise_rate: float = 0.0
    comparability: Comparability = "high"
    seed: int = 0
    span_days: int = 60
    n_topics: int = 30
    topic_size: int = 15
    vocab_size: int = 3000
    topic_share: float = 0.5
    min_length: int = 8
    max_length: int = 14
    ambiguity: float = 0.0
    start_date: str = "2024-01-01"
    source_lang: str = "src"
    target_lang: str = "tgt"

    def __post_init__(self) -> None:
        for name in ("n_parallel", "n_distractors_per_side", "date_jitter_days"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("span_days", "n_topics", "topic_size", "min_length"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1, got {getattr(self, name)}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ConfigError(f"noise_rate must be in [0, 1), got {self.noise_rate}")
        if not 0.0 <= self.ambiguity <= 1.0:
            raise ConfigError(f"ambiguity must be in [0, 1], got {self.ambiguity}")
        if not 0.0 <= self.topic_share <= 1.0:
            raise ConfigError(f"topic_share must be in [0, 1], got {self.topic_share}")
        if self.comparability not in ("high", "low"):
            raise ConfigError(f"comparability must be 'high' or 'low', got '{self.comparability}'")
        if self.max_length < self.min_length:
            raise ConfigError("max_length must not be smaller than min_length")
        if self.vocab_size <= self.n_topics * self.topic_size:
            raise ConfigError("vocab_size must exceed n_topics * topic_size")
        needed = self.n_parallel + 2 * self.n_distractors_per_side
        if needed > self.sentence_capacity():
            raise ConfigError(
                f"cannot draw {needed} distinct sentences; raise vocab_size, topic_size "
                "or the min_length..max_length range"
            )
        if self.source_lang == self.target_lang:
            raise ConfigError("source and target language tags must differ")
        try:
            parse_day(self.start_date)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def sentence_capacity(self) -> int:
        """Upper bound on the number of distinct concept sequences."""
        alphabet = 0
        if self.topic_share > 0.0:
            alphabet += self.topic_size
        if self.topic_share < 1.0:
            alphabet += self.vocab_size - self.n_topics * self.topic_size
        per_topic = sum(alphabet**length for length in range(self.min_length, self.max_length + 1))
        return self.n_topics * per_topic

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "SynthSpec":
        """Build a spec from a JSON object, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown synthetic spec keys: {', '.join(unknown)}")
        try:
            return cls(**raw)
        except TypeError as e:
            raise ConfigError(f"invalid synthetic spec: {e}") from None


@dataclass(frozen=True)
class GoldAlignment:
    """Known parallel (source id, target id) pairs."""

    pairs: frozenset[tuple[int, int]] = frozenset()

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs


@dataclass(frozen=True)
class SyntheticCorpus:
    """A generated corpus with its gold pairs and linking dictionaries."""

    corpus: ComparableCorpus
    gold: GoldAlignment
    source_pivot: ProbDictionary
    target_pivot: ProbDictionary
    source_target: ProbDictionary
    spec: SynthSpec


@dataclass(frozen=True)
class ExtractionScores:
    """Precision, recall and F-1 of one extraction."""

    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ComparisonRow:
    """One configuration's result in a comparison."""

    label: str
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    pairs: int | None = None
    seconds: float | None = None
    error: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class _Draft:
    day: int
    concepts: tuple[int, ...]
    order: float
    planted: int | None = None


class _Generator:
    """Draws topic-structured concept sequences, all distinct."""

    def __init__(self, spec: SynthSpec) -> None:
        self.spec = spec
        self.rng = random.Random(spec.seed)
        self.seen: set[tuple[int, ...]] = set()
        topic_words = spec.n_topics * spec.topic_size
        self.topics = [
            list(range(t * spec.topic_size, (t + 1) * spec.topic_size)) for t in range(spec.n_topics)
        ]
        self.general = list(range(topic_words, spec.vocab_size))
        self.schedule = [self.rng.randrange(spec.n_topics) for _ in range(spec.span_days)]

    def sentence(self, topic: int) -> tuple[int, ...]:
        spec = self.spec
        for _ in range(MAX_DRAW_ATTEMPTS):
            length = self.rng.randint(spec.min_length, spec.max_length)
            concepts = tuple(
                self.rng.choice(self.topics[topic])
                if self.rng.random() < spec.topic_share
                else self.rng.choice(self.general)
                for _ in range(length)
            )
            if concepts not in self.seen:
                self.seen.add(concepts)
                return concepts
        raise ConfigError(
            f"no new distinct sentence after {MAX_DRAW_ATTEMPTS} draws for topic {topic}; "
            "raise vocab_size, topic_size or the min_length..max_length range"
        )


def _dictionary(
    prefix_in: str, prefix_out: str, size: int, ambiguous: Mapping[int, int]
) -> ProbDictionary:
    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    for c in range(size):
        if c in ambiguous:
            entries[f"{prefix_in}{c}"] = (
                (f"{prefix_out}{c}", AMBIGUOUS_PRIMARY),
                (f"{prefix_out}{ambiguous[c]}", 1.0 - AMBIGUOUS_PRIMARY),
            )
        else:
            entries[f"{prefix_in}{c}"] = ((f"{prefix_out}{c}", 1.0),)
    return ProbDictionary(entries)


def _side(
    lang: str, drafts: list[_Draft], texts: list[str], start: date
) -> tuple[CorpusSide, dict[int, int]]:
    """Group drafts into one document per day; return the side and planted ids."""
    order = sorted(range(len(drafts)), key=lambda k: (drafts[k].day, drafts[k].order))
    records: list[RawDocument] = []
    planted_ids: dict[int, int] = {}
    next_id = 0
    by_day: dict[int, list[int]] = {}
    for k in order:
        by_day.setdefault(drafts[k].day, []).append(k)
    for day in sorted(by_day):
        members = by_day[day]
        published = start + timedelta(days=day)
        records.append(
            RawDocument(
                date=published,
                sentences=tuple(texts[k] for k in members),
                id=f"{lang}-{published.isoformat()}",
            )
        )
        for k in members:
            planted = drafts[k].planted
            if planted is not None:
                planted_ids[planted] = next_id
            next_id += 1
    return build_side(lang, records), planted_ids


def generate_synthetic(spec: SynthSpec) -> SyntheticCorpus:
    """Generate a comparable corpus with planted parallel pairs.

    Concept ``c`` is written ``s<c>`` on the source side, ``t<c>`` on the
    target side and ``p<c>`` in the pivot language. Planted pairs are the same
    concept sequence on both sides; noise replaces target tokens by
    ``tx<k>`` words missing from every dictionary. Noise draws come from their
    own random stream, so a higher noise rate corrupts a superset of the
    positions corrupted at a lower rate.

    Args:
        spec: Generation parameters

    Returns:
        Corpus, gold pairs and the source-pivot, target-pivot and
        source-target dictionaries
    """
    gen = _Generator(spec)
    rng = gen.rng
    noise_rng = random.Random(f"{spec.seed}-noise")
    start = parse_day(spec.start_date)
    last_day = spec.span_days - 1

    source: list[_Draft] = []
    target: list[_Draft] = []
    for k in range(spec.n_parallel):
        day = rng.randrange(spec.span_days)
        jitter = rng.randint(-spec.date_jitter_days, spec.date_jitter_days)
        concepts = gen.sentence(gen.schedule[day])
        source.append(_Draft(day, concepts, rng.random(), planted=k))
        target.append(_Draft(min(max(day + jitter, 0), last_day), concepts, rng.random(), planted=k))

    for draft_list, follows_schedule in ((source, True), (target, spec.comparability == "high")):
        for _ in range(spec.n_distractors_per_side):
            day = rng.randrange(spec.span_days)
            topic = gen.schedule[day] if follows_schedule else rng.randrange(spec.n_topics)
            draft_list.append(_Draft(day, gen.sentence(topic), rng.random()))

    ambiguous: dict[int, int] = {}
    for c in range(spec.vocab_size):
        if rng.random() < spec.ambiguity:
            ambiguous[c] = (c + 1 + rng.randrange(spec.vocab_size - 1)) % spec.vocab_size

    source_texts = [" ".join(f"s{c}" for c in d.concepts) for d in source]
    target_texts: list[str] = []
    for d in target:
        words: list[str] = []
        for c in d.concepts:
            u, replacement = noise_rng.random(), noise_rng.randrange(spec.vocab_size)
            corrupt = d.planted is not None and u < spec.noise_rate
            words.append(f"tx{replacement}" if corrupt else f"t{c}")
        target_texts.append(" ".join(words))

    source_side, source_ids = _side(spec.source_lang, source, source_texts, start)
    target_side, target_ids = _side(spec.target_lang, target, target_texts, start)
    gold = GoldAlignment(frozenset((source_ids[k], target_ids[k]) for k in range(spec.n_parallel)))

    logger.info(
        "generated %d source and %d target sentences with %d planted pairs",
        len(source_side),
        len(target_side),
        len(gold),
    )
    return SyntheticCorpus(
        corpus=ComparableCorpus(source_side, target_side),
        gold=gold,
        source_pivot=_dictionary("s", "p", spec.vocab_size, ambiguous),
        target_pivot=_dictionary("t", "p", spec.vocab_size, {}),
        source_target=_dictionary("s", "t", spec.vocab_size, ambiguous),
        spec=spec,
    )


def write_synthetic(bundle: SyntheticCorpus, out_dir: str | Path) -> dict[str, Path]:
    """Write a generated corpus, its gold pairs and dictionaries to a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "source": out / "source.jsonl",
        "target": out / "target.jsonl",
        "gold": out / "gold.tsv",
        "source_pivot": out / "source-pivot.dict",
        "target_pivot": out / "target-pivot.dict",
        "source_target": out / "source-target.dict",
        "spec": out / "spec.json",
    }
    dump_side(bundle.corpus.source_side, paths["source"])
    dump_side(bundle.corpus.target_side, paths["target"])
    save_gold(bundle.gold, paths["gold"])
    save_dictionary(bundle.source_pivot, paths["source_pivot"])
    save_dictionary(bundle.target_pivot, paths["target_pivot"])
    save_dictionary(bundle.source_target, paths["source_target"])
    with open(paths["spec"], "w", encoding="utf-8") as f:
        json.dump(asdict(bundle.spec), f, indent=2, sort_keys=True)
        f.write("\n")
    return paths


def score_extraction(
    extracted: Iterable[tuple[int, int]], gold: GoldAlignment
) -> ExtractionScores:
    """Precision, recall and F-1 of extracted pairs against gold pairs.

    With nothing extracted, precision is 1; recall is 1 only when gold is
    empty too. With an empty gold set and something extracted, everything
    is 0.
    """
    found = set(extracted)
    if not found:
        return ExtractionScores(1.0, 1.0, 1.0) if not gold.pairs else ExtractionScores(1.0, 0.0, 0.0)
    if not gold.pairs:
        return ExtractionScores(0.0, 0.0, 0.0)

    correct = len(found & gold.pairs)
    precision = correct / len(found)
    recall = correct / len(gold.pairs)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return ExtractionScores(precision, recall, f1)


def window_violations(
    pairs: Iterable[ScoredPair], corpus: ComparableCorpus, window_days: int
) -> list[ScoredPair]:
    """Pairs joining sentences dated more than window_days apart."""
    return [
        p
        for p in pairs
        if abs(
            (
                corpus.source_side.sentence(p.source_id).date
                - corpus.target_side.sentence(p.target_id).date
            ).days
        )
        > window_days
    ]


def compare_runs(
    configs: Sequence[tuple[str, PipelineConfig]],
    corpus: ComparableCorpus,
    gold: GoldAlignment,
    src_adapter: TranslationAdapter,
    tgt_adapter: TranslationAdapter,
    st_adapter: TranslationAdapter | None = None,
    stops: StopWordList | None = None,
    resources: TerpResources | None = None,
    parallel: bool = False,
) -> list[ComparisonRow]:
    """Run the pipeline once per labelled configuration on the same corpus.

    A failing configuration yields a row carrying the error and the remaining
    configurations still run. With parallel set, rows run concurrently and
    their timings are not comparable with each other.

    Args:
        configs: (label, configuration) pairs, at least two
        corpus: Corpus to extract from
        gold: Gold pairs of the corpus
        src_adapter: Source-to-pivot adapter
        tgt_adapter: Target-to-pivot adapter
        st_adapter: Source-to-target adapter for direct and inverted-filter configurations
        stops: Pivot stop words
        resources: TERp resources
        parallel: Run configurations concurrently

    Returns:
        One row per configuration, in input order

    Raises:
        ConfigError: If fewer than two configurations are given
    """
    if len(configs) < 2:
        raise ConfigError(f"comparison needs at least 2 configurations, got {len(configs)}")

    def run(item: tuple[str, PipelineConfig]) -> ComparisonRow:
        label, cfg = item
        started = time.perf_counter()
        try:
            pairs, report = run_extraction(
                corpus,
                src_adapter,
                tgt_adapter,
                st_adapter if cfg.needs_st_adapter else None,
                cfg,
                stops=stops,
                resources=resources,
            )
        except ExtractionError as e:
            logger.error("configuration '%s' failed: %s", label, e)
            return ComparisonRow(label, error=str(e))
        seconds = time.perf_counter() - started
        scores = score_extraction((p.ids for p in pairs), gold)
        return ComparisonRow(
            label,
            precision=scores.precision,
            recall=scores.recall,
            f1=scores.f1,
            pairs=len(pairs),
            seconds=seconds,
            extra={"counters": asdict(report.counters)},
        )

    if parallel:
        logger.info("running %d configurations in parallel; timings are not comparable", len(configs))
        with ThreadPoolExecutor(max_workers=len(configs)) as pool:
            return list(pool.map(run, configs))
    return [run(item) for item in configs]


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def write_comparison_csv(rows: Sequence[ComparisonRow], path: str | Path) -> None:
    """Write comparison rows as CSV with a fixed header."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COMPARISON_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.label,
                    _fmt(row.precision),
                    _fmt(row.recall),
                    _fmt(row.f1),
                    "" if row.pairs is None else row.pairs,
                    "" if row.seconds is None else f"{row.seconds:.3f}",
                ]
            )


def save_gold(gold: GoldAlignment, path: str | Path) -> None:
    """Write gold pairs as sorted ``source_id<TAB>target_id`` lines."""
    with open(path, "w", encoding="utf-8") as f:
        for source_id, target_id in sorted(gold.pairs):
            f.write(f"{source_id}\t{target_id}\n")


def _id_pairs(path: str | Path, what: str) -> list[tuple[int, int]]:
    name = str(path)
    pairs: list[tuple[int, int]] = []
    try:
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) < 2:
                    raise IngestError("expected source and target ids", name, line_no)
                try:
                    pairs.append((int(parts[0]), int(parts[1])))
                except ValueError:
                    raise IngestError("ids must be integers", name, line_no) from None
    except FileNotFoundError:
        raise IngestError(f"{what} file not found", name) from None
    return pairs


def load_gold(path: str | Path) -> GoldAlignment:
    """Read a gold alignment TSV file."""
    return GoldAlignment(frozenset(_id_pairs(path, "gold")))


def load_extracted(path: str | Path) -> list[tuple[int, int]]:
    """Read the id columns of an extracted-corpus TSV file."""
    return _id_pairs(path, "extracted corpus")
