#!/usr/bin/env python
"""CLI interface for pivotex - parallel sentence extraction through a pivot language."""

import argparse
import json
import logging
import sys
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, NoReturn, cast

from colorama import init as colorama_init

from pivotex.color import (
    bright_red,
    bright_white,
    dim_white,
    magenta,
    score_color,
    should_use_color,
)
from pivotex.corpus import (
    ComparableCorpus,
    StopWordList,
    default_stop_words,
    ingest_corpus,
    load_stop_words,
)
from pivotex.errors import ConfigError, ExtractionError
from pivotex.evaluate import (
    ComparisonRow,
    SynthSpec,
    compare_runs,
    generate_synthetic,
    load_extracted,
    load_gold,
    score_extraction,
    write_comparison_csv,
    write_synthetic,
)
from pivotex.filters import FILTER_MODES, ScoredPair
from pivotex.histogram import Histogram, render_histogram, score_histogram
from pivotex.ir import InvertedIndex, load_index, save_index
from pivotex.metrics import METRICS, TerpResources, TerpWeights, load_terp_resources
from pivotex.pipeline import ExtractionReport, PipelineConfig, emit_corpus, run_extraction
from pivotex.plot import pair_timeline, render_timeline_chart
from pivotex.selection import SELECTION_MODES
from pivotex.translate import (
    DictionaryAdapter,
    ExternalCommandAdapter,
    IdentityAdapter,
    TranslationAdapter,
    load_dictionary,
)


logger = logging.getLogger(__name__)

DEFAULT_CONFIG = ".pivotex.json"

DEFAULTS = PipelineConfig()
DEFAULT_WEIGHTS = TerpWeights()


@dataclass
class ConfigOptions:
    """Config option mapping metadata: flag name to destination."""

    int_options: dict[str, tuple[str, int | None]]
    float_options: dict[str, str]
    bool_options: dict[str, str]
    str_options: dict[str, str]
    choice_options: dict[str, tuple[str, tuple[str, ...]]]


CONFIG_OPTIONS = ConfigOptions(
    int_options={
        "--window-days": ("window_days", 0),
        "--n-top-ngd": ("n_top_ngd", 1),
        "--m-top-ir": ("m_top_ir", 1),
        "--top-k-ir": ("top_k_ir", 1),
        "--n-best": ("n_best_inverted", 1),
        "--seed": ("seed", None),
        "--jobs": ("jobs", 1),
        "--buckets": ("buckets", 20),
    },
    float_options={
        "--x-percent": "x_percent",
        "--top-p": "top_p_output",
        "--lambda": "lam",
        "--max-tail": "max_tail",
        "--threshold": "threshold",
        "--bm25-k1": "bm25_k1",
        "--bm25-b": "bm25_b",
        "--terp-shift-cost": "terp_shift_cost",
        "--terp-stem-cost": "terp_stem_cost",
        "--terp-synonym-cost": "terp_synonym_cost",
    },
    bool_options={
        "--direct": "direct",
        "--ngd-pruning": "ngd_pruning",
        "--modified-ir": "modified_ir",
        "--one-to-one": "one_to_one",
        "--with-spans": "with_spans",
    },
    str_options={
        "--src-lang": "src_lang",
        "--tgt-lang": "tgt_lang",
        "--src-dict": "src_dict",
        "--tgt-dict": "tgt_dict",
        "--st-dict": "st_dict",
        "--src-command": "src_command",
        "--tgt-command": "tgt_command",
        "--st-command": "st_command",
        "--stop-words": "stop_words",
        "--terp-stems": "terp_stems",
        "--terp-synonyms": "terp_synonyms",
        "--terp-phrases": "terp_phrases",
        "--index-cache": "index_cache",
    },
    choice_options={
        "--mode": ("mode", SELECTION_MODES),
        "--metric": ("metric", METRICS),
        "--filter-mode": ("filter_mode", FILTER_MODES),
        "--ngd-reference": ("ngd_reference", ("target", "both")),
        "--oov": ("oov", ("copy", "drop")),
    },
)


def fail(message: str) -> NoReturn:
    """Print an error to stderr and exit with status 1."""
    print(f"Error: {message}", file=sys.stderr)
    sys.exit(1)


def load_config(filepath: str) -> tuple[dict[str, object], bool, bool]:
    """Load config from JSON file.

    Args:
        filepath: Path to config file

    Returns:
        Tuple of (config dict, found flag, malformed flag)
    """
    try:
        with open(filepath, encoding="utf-8") as f:
            config = json.load(f)
    except FileNotFoundError:
        return ({}, False, False)
    except (OSError, json.JSONDecodeError):
        return ({}, True, True)

    if not isinstance(config, dict):
        return ({}, True, True)

    return (config, True, False)


def parse_color_defaults(config: Mapping[str, object]) -> tuple[dict[str, object], bool]:
    """Parse color-related config defaults."""
    defaults: dict[str, object] = {}
    color_value = config.get("--color")
    no_color_value = config.get("--no-color")

    if "--color" in config and not isinstance(color_value, bool):
        return ({}, False)
    if "--no-color" in config and not isinstance(no_color_value, bool):
        return ({}, False)
    if color_value is True and no_color_value is True:
        return ({}, False)

    if color_value is True:
        defaults["color_flag"] = True
    if no_color_value is True:
        defaults["color_flag"] = False

    return (defaults, True)


def validate_int_option(value: object, min_value: int | None) -> int | None:
    """Validate integer option value."""
    if not isinstance(value, int) or isinstance(value, bool):
        return None
    if min_value is not None and value < min_value:
        return None
    return value


def validate_float_option(value: object) -> float | None:
    """Validate float option value (integers accepted)."""
    if not isinstance(value, int | float) or isinstance(value, bool):
        return None
    return float(value)


def apply_config_entry(
    key: str, value: object, defaults: dict[str, object], options: ConfigOptions
) -> bool:
    """Apply a config entry to defaults if valid.

    Unknown keys are ignored with a warning.
    """
    if key in options.int_options:
        dest, min_value = options.int_options[key]
        int_value = validate_int_option(value, min_value)
        if int_value is None:
            return False
        defaults[dest] = int_value
    elif key in options.float_options:
        float_value = validate_float_option(value)
        if float_value is None:
            return False
        defaults[options.float_options[key]] = float_value
    elif key in options.bool_options:
        if not isinstance(value, bool):
            return False
        defaults[options.bool_options[key]] = value
    elif key in options.str_options:
        if not isinstance(value, str) or not value.strip():
            return False
        defaults[options.str_options[key]] = value
    elif key in options.choice_options:
        dest, choices = options.choice_options[key]
        if value not in choices:
            return False
        defaults[dest] = value
    else:
        logger.warning("ignoring unknown config key '%s'", key)
    return True


def build_config_defaults(config: Mapping[str, object]) -> dict[str, object] | None:
    """Validate config values and build parser defaults.

    Args:
        config: Raw config dict keyed by flag name

    Returns:
        Defaults keyed by argument destination, or None if malformed
    """
    defaults, color_valid = parse_color_defaults(config)
    if not color_valid:
        return None

    for key, value in config.items():
        if key in ("--color", "--no-color"):
            continue
        if not apply_config_entry(key, value, defaults, CONFIG_OPTIONS):
            logger.debug("invalid value for config key '%s': %r", key, value)
            return None

    return defaults


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=str,
        default=DEFAULT_CONFIG,
        metavar="FILE",
        help=f"JSON config keyed by flag names (default: {DEFAULT_CONFIG} if present)",
    )

    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "--verbose", "-v", action="store_true", help="Log progress information to stderr"
    )
    verbosity.add_argument("--debug", action="store_true", help="Log debug information to stderr")

    color_group = parser.add_mutually_exclusive_group()
    color_group.add_argument(
        "--color",
        action="store_true",
        dest="color_flag",
        default=None,
        help="Force colored output (default: auto-detect based on TTY)",
    )
    color_group.add_argument(
        "--no-color",
        action="store_false",
        dest="color_flag",
        help="Disable colored output",
    )


def _add_corpus_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--src", required=True, metavar="JSONL", help="Source-side corpus")
    parser.add_argument("--tgt", required=True, metavar="JSONL", help="Target-side corpus")
    parser.add_argument(
        "--src-lang", default="src", metavar="TAG", help="Source language tag (default: src)"
    )
    parser.add_argument(
        "--tgt-lang", default="tgt", metavar="TAG", help="Target language tag (default: tgt)"
    )


def _add_adapter_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("translation")
    for side, description in (
        ("src", "source to pivot"),
        ("tgt", "target to pivot"),
        ("st", "source to target, for inverted filtering"),
    ):
        group.add_argument(
            f"--{side}-dict",
            metavar="FILE",
            help=f"Dictionary file ({description}): source<TAB>translation<TAB>probability",
        )
        group.add_argument(
            f"--{side}-command",
            metavar="CMD",
            help=f"External translation command ({description}); {{n_best}} and {{seed}} are substituted",
        )
    group.add_argument(
        "--oov",
        choices=["copy", "drop"],
        default="copy",
        help="Dictionary handling of unknown words (default: copy)",
    )


def _add_pipeline_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline")
    group.add_argument(
        "--window-days",
        type=int,
        default=None,
        metavar="N",
        help="Date window half-width (default: 5, or 7 with --ngd-pruning)",
    )
    group.add_argument(
        "--direct",
        action="store_true",
        help="Translate source sentences straight into the target language (needs --st-dict/--st-command)",
    )
    group.add_argument(
        "--ngd-pruning",
        action="store_true",
        help="Prune each query's in-window search space to the NGD-closest fraction",
    )
    group.add_argument(
        "--modified-ir",
        action="store_true",
        help="Blend NGD similarity into the IR ranking and add the NGD top candidates",
    )
    group.add_argument(
        "--x-percent",
        type=float,
        default=DEFAULTS.x_percent,
        metavar="F",
        help=f"Fraction kept by NGD pruning (default: {DEFAULTS.x_percent})",
    )
    group.add_argument(
        "--n-top-ngd",
        type=int,
        default=DEFAULTS.n_top_ngd,
        metavar="N",
        help=f"Candidates taken from the NGD ranking (default: {DEFAULTS.n_top_ngd})",
    )
    group.add_argument(
        "--m-top-ir",
        type=int,
        default=DEFAULTS.m_top_ir,
        metavar="N",
        help=f"Candidates taken from the blended IR ranking (default: {DEFAULTS.m_top_ir})",
    )
    group.add_argument(
        "--top-k-ir",
        type=int,
        default=None,
        metavar="N",
        help="IR hits per query (default: 5, or 10 with --modified-ir)",
    )
    group.add_argument(
        "--lambda",
        type=float,
        dest="lam",
        default=DEFAULTS.lam,
        metavar="F",
        help=f"Weight of NGD similarity in the blend (default: {DEFAULTS.lam})",
    )
    group.add_argument(
        "--mode",
        choices=list(SELECTION_MODES),
        default=DEFAULTS.mode,
        help=f"Candidate combination (default: {DEFAULTS.mode})",
    )
    group.add_argument(
        "--metric",
        choices=list(METRICS),
        default=DEFAULTS.metric,
        help=f"Filter metric (default: {DEFAULTS.metric})",
    )
    group.add_argument(
        "--filter-mode",
        choices=list(FILTER_MODES),
        default=DEFAULTS.filter_mode,
        help=f"Pair filter (default: {DEFAULTS.filter_mode})",
    )
    group.add_argument(
        "--n-best",
        type=int,
        dest="n_best_inverted",
        default=DEFAULTS.n_best_inverted,
        metavar="N",
        help=f"n-best size for inverted translation (default: {DEFAULTS.n_best_inverted})",
    )
    group.add_argument(
        "--max-tail",
        type=float,
        default=DEFAULTS.max_tail,
        metavar="F",
        help=f"Tolerated unaligned tail fraction (default: {DEFAULTS.max_tail})",
    )
    group.add_argument(
        "--threshold",
        type=float,
        default=None,
        metavar="F",
        help="Accept pairs scoring at most this value (default: accept all)",
    )
    group.add_argument(
        "--top-p",
        type=float,
        dest="top_p_output",
        default=DEFAULTS.top_p_output,
        metavar="F",
        help=f"Fraction of ranked pairs emitted (default: {DEFAULTS.top_p_output})",
    )
    group.add_argument(
        "--bm25-k1", type=float, default=DEFAULTS.bm25_k1, metavar="F", help="BM25 k1 (default: 1.2)"
    )
    group.add_argument(
        "--bm25-b", type=float, default=DEFAULTS.bm25_b, metavar="F", help="BM25 b (default: 0.75)"
    )
    group.add_argument(
        "--seed", type=int, default=DEFAULTS.seed, metavar="N", help="Random seed (default: 0)"
    )
    group.add_argument(
        "--jobs", type=int, default=DEFAULTS.jobs, metavar="N", help="Worker threads (default: 1)"
    )
    group.add_argument(
        "--one-to-one", action="store_true", help="Use each target sentence at most once"
    )
    group.add_argument(
        "--ngd-reference",
        choices=["target", "both"],
        default=DEFAULTS.ngd_reference,
        help="Reference documents for NGD statistics (default: target)",
    )
    group.add_argument(
        "--progress",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Show progress bars (default: when stderr is a terminal)",
    )

    resources = parser.add_argument_group("resources")
    resources.add_argument(
        "--stop-words", metavar="FILE", help="Pivot stop words, one per line (default: built-in)"
    )
    resources.add_argument("--terp-stems", metavar="FILE", help="TERp stems: token<TAB>stem")
    resources.add_argument(
        "--terp-synonyms", metavar="FILE", help="TERp synonym sets, comma-separated per line"
    )
    resources.add_argument(
        "--terp-phrases", metavar="FILE", help="TERp phrase table: phrase<TAB>phrase<TAB>cost"
    )
    resources.add_argument(
        "--terp-shift-cost",
        type=float,
        default=DEFAULT_WEIGHTS.shift,
        metavar="F",
        help="TERp shift cost (default: 1.0)",
    )
    resources.add_argument(
        "--terp-stem-cost",
        type=float,
        default=DEFAULT_WEIGHTS.stem,
        metavar="F",
        help="TERp stem substitution cost (default: 0.2)",
    )
    resources.add_argument(
        "--terp-synonym-cost",
        type=float,
        default=DEFAULT_WEIGHTS.synonym,
        metavar="F",
        help="TERp synonym substitution cost (default: 0.2)",
    )


def create_parser(defaults: Mapping[str, object] | None = None) -> argparse.ArgumentParser:
    """Create argument parser for CLI.

    Args:
        defaults: Config-file values applied as defaults to every subcommand

    Returns:
        Parser with extract, gen-synthetic, evaluate and compare subcommands
    """
    parser = argparse.ArgumentParser(
        prog="pivotex",
        description="Extract parallel sentence pairs from comparable corpora through a pivot language.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    extract = commands.add_parser("extract", help="Extract parallel pairs into a TSV file")
    _add_common_options(extract)
    _add_corpus_options(extract)
    _add_adapter_options(extract)
    _add_pipeline_options(extract)
    extract.add_argument("--out", required=True, metavar="TSV", help="Output corpus file")
    extract.add_argument(
        "--with-spans", action="store_true", help="Append kept pivot span lengths to each line"
    )
    extract.add_argument(
        "--index-cache", metavar="FILE", help="Load the target index from FILE, or save it there"
    )
    extract.add_argument(
        "--buckets",
        type=int,
        default=50,
        metavar="N",
        help="Number of bars in summary charts (default: 50, minimum: 20)",
    )

    synthetic = commands.add_parser("gen-synthetic", help="Generate a synthetic comparable corpus")
    _add_common_options(synthetic)
    synthetic.add_argument("--spec", metavar="JSON", help="Generator parameters as a JSON object")
    synthetic.add_argument("--out-dir", required=True, metavar="DIR", help="Output directory")
    synthetic.add_argument("--seed", type=int, default=None, metavar="N", help="Override the seed")

    evaluate = commands.add_parser("evaluate", help="Score an extracted corpus against gold pairs")
    _add_common_options(evaluate)
    evaluate.add_argument("--extracted", required=True, metavar="TSV", help="Extracted corpus")
    evaluate.add_argument("--gold", required=True, metavar="TSV", help="Gold alignment")

    compare = commands.add_parser("compare", help="Compare several configurations on one corpus")
    _add_common_options(compare)
    _add_corpus_options(compare)
    _add_adapter_options(compare)
    _add_pipeline_options(compare)
    compare.add_argument(
        "--configs",
        required=True,
        metavar="JSON",
        help="JSON object mapping run labels to option objects keyed by flag names",
    )
    compare.add_argument("--gold", required=True, metavar="TSV", help="Gold alignment")
    compare.add_argument("--out", metavar="CSV", help="Write the comparison table as CSV")
    compare.add_argument(
        "--parallel", action="store_true", help="Run configurations concurrently"
    )

    if defaults:
        for sub in (extract, synthetic, evaluate, compare):
            sub.set_defaults(**defaults)

    return parser


def parse_config_argument(argv: Sequence[str]) -> tuple[str, bool]:
    """Parse only the --config argument from argv.

    Returns:
        Tuple of (config path, explicitly given flag)
    """
    config_parser = argparse.ArgumentParser(add_help=False)
    config_parser.add_argument("--config", type=str, default=None)
    config_args, _ = config_parser.parse_known_args(list(argv))
    if config_args.config is None:
        return (DEFAULT_CONFIG, False)
    return (cast(str, config_args.config), True)


def parse_arguments(argv: Sequence[str]) -> argparse.Namespace:
    """Parse command-line arguments on top of config-file defaults.

    Args:
        argv: Arguments without the program name

    Returns:
        Parsed arguments namespace
    """
    config_name, explicit = parse_config_argument(argv)
    config_path = Path(config_name)
    if not config_path.is_absolute():
        config_path = Path.cwd() / config_name
    config, found, load_error = load_config(str(config_path))

    if explicit and not found:
        fail(f"Config file '{config_name}' not found")

    defaults: dict[str, object] | None = None
    if not load_error:
        defaults = build_config_defaults(config)
    if load_error or defaults is None:
        if explicit:
            fail(f"Malformed config '{config_name}'")
        print("Malformed config", file=sys.stderr)
        defaults = None

    return create_parser(defaults).parse_args(list(argv))


def configure_logging(args: argparse.Namespace) -> None:
    """Route library logging to stderr at the requested verbosity."""
    level = logging.WARNING
    if args.debug:
        level = logging.DEBUG
    elif args.verbose:
        level = logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def pipeline_config(values: Mapping[str, Any]) -> PipelineConfig:
    """Build a pipeline configuration from argument destinations.

    Raises:
        ConfigError: If a value is out of range
    """
    names = {f.name for f in fields(PipelineConfig)} - {"terp_weights"}
    weights = TerpWeights(
        shift=values.get("terp_shift_cost", DEFAULT_WEIGHTS.shift),
        stem=values.get("terp_stem_cost", DEFAULT_WEIGHTS.stem),
        synonym=values.get("terp_synonym_cost", DEFAULT_WEIGHTS.synonym),
    )
    cfg = PipelineConfig(**{k: values[k] for k in names if k in values}, terp_weights=weights)
    cfg.resolved().validate()
    return cfg


def build_adapter(
    dict_path: str | None, command: str | None, oov: str, output_lang: str, flag: str
) -> TranslationAdapter | None:
    """Adapter for one translation direction, None when neither source is set.

    Raises:
        ConfigError: If both a dictionary and a command are given
    """
    if dict_path and command:
        raise ConfigError(f"--{flag}-dict and --{flag}-command are mutually exclusive")
    if dict_path:
        dictionary = load_dictionary(dict_path, oov_policy="drop" if oov == "drop" else "copy")
        return DictionaryAdapter(dictionary, output_lang=output_lang)
    if command:
        return ExternalCommandAdapter.from_string(command, output_lang=output_lang)
    return None


def st_requirement(cfg: PipelineConfig) -> str | None:
    """Flag that makes a run need a source-target adapter, if any."""
    if cfg.direct:
        return "--direct"
    if cfg.filter_mode == "inverted":
        return "--filter-mode inverted"
    return None


def build_adapters(
    args: argparse.Namespace, needs_st: str | None
) -> tuple[TranslationAdapter, TranslationAdapter, TranslationAdapter | None]:
    """Source-pivot, target-pivot and (optional) source-target adapters.

    Raises:
        ConfigError: If needs_st names a flag and no source-target adapter is given
    """
    src = build_adapter(args.src_dict, args.src_command, args.oov, "pivot", "src")
    tgt = build_adapter(args.tgt_dict, args.tgt_command, args.oov, "pivot", "tgt")
    st = build_adapter(args.st_dict, args.st_command, args.oov, args.tgt_lang, "st")
    if needs_st and st is None:
        raise ConfigError(f"{needs_st} needs --st-dict or --st-command")
    return (
        src or IdentityAdapter(output_lang="pivot"),
        tgt or IdentityAdapter(output_lang="pivot"),
        st,
    )


def load_resources(args: argparse.Namespace) -> tuple[StopWordList, TerpResources]:
    stops = load_stop_words(args.stop_words) if args.stop_words else default_stop_words()
    resources = load_terp_resources(args.terp_stems, args.terp_synonyms, args.terp_phrases)
    return stops, resources


def load_corpus(args: argparse.Namespace) -> ComparableCorpus:
    return ComparableCorpus(
        ingest_corpus(args.src, args.src_lang), ingest_corpus(args.tgt, args.tgt_lang)
    )


def _cached_index(path: str | None, cfg: PipelineConfig, n_docs: int) -> InvertedIndex | None:
    if path is None or not Path(path).exists():
        return None
    index = load_index(path)
    if index.n_docs != n_docs or index.k1 != cfg.bm25_k1 or index.b != cfg.bm25_b:
        logger.warning("index cache '%s' does not match this run; rebuilding", path)
        return None
    logger.info("loaded index cache '%s'", path)
    return index


def display_report(
    pairs: Sequence[ScoredPair],
    corpus: ComparableCorpus,
    report: ExtractionReport,
    buckets: int,
    color_enabled: bool,
) -> None:
    """Print the run summary: timeline, counters and score distribution."""
    timeline = pair_timeline(corpus.source_side.sentence(p.source_id).date for p in pairs)
    if timeline:
        date_line, chart_line, underline = render_timeline_chart(timeline, buckets, color_enabled)
        print()
        print(date_line)
        print(chart_line)
        print(underline)

    print(f"Pairs emitted: {magenta(str(report.pairs_emitted), color_enabled)}")
    if pairs:
        best, worst = pairs[0].score, pairs[-1].score
        best_str = f"{score_color(best, color_enabled)}{best:.4f}"
        print(f"Score range: {best_str}{dim_white(' .. ', color_enabled)}{worst:.4f}")
    if not report.ngd_enabled and (report.config.get("ngd_pruning") or report.config.get("modified_ir")):
        print(bright_red("NGD disabled: fewer than 2 reference documents", color_enabled))

    print(bright_white("\nStages:", color_enabled))
    stages = Histogram(dict(report.counters.as_stages()))
    for line in render_histogram(stages, buckets, report.counters.translated_source, color_enabled):
        print(f"  {line}")

    if pairs:
        print(bright_white("\nScores:", color_enabled))
        for line in render_histogram(score_histogram(p.score for p in pairs), buckets, None, color_enabled):
            print(f"  {line}")


def run_extract(args: argparse.Namespace, color_enabled: bool) -> None:
    """Handle the extract subcommand."""
    cfg = pipeline_config(vars(args))
    corpus = load_corpus(args)
    src, tgt, st = build_adapters(args, st_requirement(cfg))
    stops, resources = load_resources(args)
    progress = args.progress if args.progress is not None else sys.stderr.isatty()

    index_cache = args.index_cache
    if index_cache and cfg.direct:
        logger.warning("--index-cache holds a pivot index and is ignored with --direct")
        index_cache = None
    index = _cached_index(index_cache, cfg, len(corpus.target_side))
    pairs, report = run_extraction(
        corpus,
        src,
        tgt,
        st if cfg.needs_st_adapter else None,
        cfg,
        stops=stops,
        resources=resources,
        index=index,
        progress=progress,
    )
    if index_cache and index is None and report.index is not None:
        save_index(report.index, index_cache)
        logger.info("saved index cache '%s'", index_cache)

    emit_corpus(pairs, corpus, args.out, report, with_spans=args.with_spans)
    display_report(pairs, corpus, report, args.buckets, color_enabled)


def run_gen_synthetic(args: argparse.Namespace, color_enabled: bool) -> None:
    """Handle the gen-synthetic subcommand."""
    raw: dict[str, Any] = {}
    if args.spec:
        spec_data, found, malformed = load_config(args.spec)
        if not found:
            fail(f"Spec file '{args.spec}' not found")
        if malformed:
            fail(f"Malformed spec '{args.spec}'")
        raw = dict(spec_data)
    if args.seed is not None:
        raw["seed"] = args.seed

    bundle = generate_synthetic(SynthSpec.from_dict(raw))
    paths = write_synthetic(bundle, args.out_dir)

    print(f"Source sentences: {magenta(str(len(bundle.corpus.source_side)), color_enabled)}")
    print(f"Target sentences: {magenta(str(len(bundle.corpus.target_side)), color_enabled)}")
    print(f"Planted pairs: {magenta(str(len(bundle.gold)), color_enabled)}")
    print(bright_white("\nFiles:", color_enabled))
    for name, path in paths.items():
        print(f"  {dim_white(f'{name:14s}', color_enabled)}{path}")


def run_evaluate(args: argparse.Namespace, color_enabled: bool) -> None:
    """Handle the evaluate subcommand."""
    scores = score_extraction(load_extracted(args.extracted), load_gold(args.gold))
    print(f"Precision: {magenta(f'{scores.precision:.4f}', color_enabled)}")
    print(f"Recall: {magenta(f'{scores.recall:.4f}', color_enabled)}")
    print(f"F1: {magenta(f'{scores.f1:.4f}', color_enabled)}")


def load_run_configs(path: str, base: Mapping[str, Any]) -> list[tuple[str, PipelineConfig]]:
    """Read labelled configurations, each layered over the command-line values.

    Raises:
        ConfigError: If the file or an entry is malformed
    """
    config, found, malformed = load_config(path)
    if not found:
        raise ConfigError(f"configs file '{path}' not found")
    if malformed:
        raise ConfigError(f"malformed configs file '{path}'")

    runs: list[tuple[str, PipelineConfig]] = []
    for label, options in config.items():
        if not isinstance(options, dict):
            raise ConfigError(f"configuration '{label}' must be a JSON object")
        overrides = build_config_defaults(options)
        if overrides is None:
            raise ConfigError(f"malformed configuration '{label}'")
        runs.append((label, pipeline_config({**base, **overrides})))
    return runs


def _row_line(row: ComparisonRow, color_enabled: bool) -> str:
    if row.error is not None:
        return f"{row.label:20s} {bright_red('error: ' + row.error, color_enabled)}"
    return (
        f"{row.label:20s} "
        f"P {magenta(f'{row.precision:.4f}', color_enabled)}  "
        f"R {magenta(f'{row.recall:.4f}', color_enabled)}  "
        f"F1 {magenta(f'{row.f1:.4f}', color_enabled)}  "
        f"pairs {row.pairs}  "
        f"{dim_white(f'{row.seconds:.2f}s', color_enabled)}"
    )


def run_compare(args: argparse.Namespace, color_enabled: bool) -> None:
    """Handle the compare subcommand."""
    runs = load_run_configs(args.configs, vars(args))
    corpus = load_corpus(args)
    needs_st = next((flag for _, cfg in runs if (flag := st_requirement(cfg))), None)
    src, tgt, st = build_adapters(args, needs_st)
    stops, resources = load_resources(args)

    rows = compare_runs(
        runs,
        corpus,
        load_gold(args.gold),
        src,
        tgt,
        st,
        stops=stops,
        resources=resources,
        parallel=args.parallel,
    )
    if args.out:
        write_comparison_csv(rows, args.out)

    print(bright_white("Runs:", color_enabled))
    for row in rows:
        print(f"  {_row_line(row, color_enabled)}")


COMMANDS = {
    "extract": run_extract,
    "gen-synthetic": run_gen_synthetic,
    "evaluate": run_evaluate,
    "compare": run_compare,
}


def main(argv: Sequence[str] | None = None) -> None:
    """Main CLI entry point."""
    args = parse_arguments(sys.argv[1:] if argv is None else argv)
    configure_logging(args)

    color_enabled = should_use_color(args.color_flag)
    if color_enabled:
        colorama_init(autoreset=True, strip=False)

    if getattr(args, "buckets", 50) < 20:
        fail("--buckets must be at least 20")

    try:
        COMMANDS[args.command](args, color_enabled)
    except ExtractionError as e:
        fail(str(e))
    except OSError as e:
        fail(f"{e.filename or 'I/O'}: {e.strerror or e}")


if __name__ == "__main__":
    main()
