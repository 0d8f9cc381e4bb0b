"""pivotex - Extract parallel sentences from comparable corpora through a pivot language."""

from pivotex.cli import main
from pivotex.corpus import ComparableCorpus, CorpusSide, Sentence, ingest_corpus
from pivotex.errors import ConfigError, ExtractionError
from pivotex.evaluate import SynthSpec, compare_runs, generate_synthetic, score_extraction
from pivotex.filters import ScoredPair
from pivotex.ir import build_index, query_window
from pivotex.metrics import ter, terp, wer
from pivotex.ngd import build_term_stats, dis_ngd
from pivotex.pipeline import ExtractionReport, PipelineConfig, emit_corpus, run_extraction
from pivotex.translate import DictionaryAdapter, IdentityAdapter, load_dictionary


__version__ = "0.1.0"

__all__ = [
    "ComparableCorpus",
    "ConfigError",
    "CorpusSide",
    "DictionaryAdapter",
    "ExtractionError",
    "ExtractionReport",
    "IdentityAdapter",
    "PipelineConfig",
    "ScoredPair",
    "Sentence",
    "SynthSpec",
    "__version__",
    "build_index",
    "build_term_stats",
    "compare_runs",
    "dis_ngd",
    "emit_corpus",
    "generate_synthetic",
    "ingest_corpus",
    "load_dictionary",
    "main",
    "query_window",
    "run_extraction",
    "score_extraction",
    "ter",
    "terp",
    "wer",
]
