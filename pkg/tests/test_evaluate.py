"""Tests for synthetic corpus generation, scoring and configuration comparison."""

import csv
import json
from pathlib import Path

import pytest

from pivotex.corpus import ingest_corpus
from pivotex.errors import ConfigError, IngestError
from pivotex.evaluate import (
    COMPARISON_HEADER,
    ComparisonRow,
    ExtractionScores,
    GoldAlignment,
    SynthSpec,
    SyntheticCorpus,
    compare_runs,
    generate_synthetic,
    load_extracted,
    load_gold,
    score_extraction,
    write_comparison_csv,
    write_synthetic,
)
from pivotex.pipeline import PipelineConfig
from pivotex.translate import DictionaryAdapter, load_dictionary


SMALL = SynthSpec(
    n_parallel=8,
    n_distractors_per_side=30,
    span_days=10,
    n_topics=4,
    topic_size=5,
    vocab_size=60,
    seed=3,
)


def concepts(tokens: tuple[str, ...]) -> list[str]:
    """Strip the language prefix from synthetic words."""
    return [token.lstrip("st") for token in tokens]


def test_generation_is_deterministic() -> None:
    """Test the same spec yields the same corpus and gold pairs."""
    first = generate_synthetic(SMALL)
    second = generate_synthetic(SMALL)

    assert first.gold == second.gold
    assert [s.text for s in first.corpus.target_side] == [s.text for s in second.corpus.target_side]
    assert [s.date for s in first.corpus.source_side] == [s.date for s in second.corpus.source_side]


def test_generation_sizes_and_planted_pairs() -> None:
    """Test side sizes and that noiseless planted pairs share their concepts."""
    bundle = generate_synthetic(SMALL)
    corpus = bundle.corpus

    assert len(corpus.source_side) == 38
    assert len(corpus.target_side) == 38
    assert len(bundle.gold) == 8
    for source_id, target_id in bundle.gold.pairs:
        source = corpus.source_side.sentence(source_id)
        target = corpus.target_side.sentence(target_id)
        assert source.date == target.date
        assert concepts(source.tokens) == concepts(target.tokens)
        assert all(token.startswith("s") for token in source.tokens)
        assert all(token.startswith("t") for token in target.tokens)


def test_generation_without_planted_pairs() -> None:
    """Test a corpus of distractors only has an empty gold set."""
    bundle = generate_synthetic(SynthSpec(n_parallel=0, n_distractors_per_side=5, vocab_size=500))

    assert len(bundle.gold) == 0
    assert len(bundle.corpus.source_side) == 5


def test_generation_date_jitter_is_bounded() -> None:
    """Test planted pairs are dated at most date_jitter_days apart."""
    spec = SynthSpec(
        n_parallel=20, n_distractors_per_side=0, date_jitter_days=2, vocab_size=500, seed=1
    )
    bundle = generate_synthetic(spec)

    for source_id, target_id in bundle.gold.pairs:
        gap = (
            bundle.corpus.source_side.sentence(source_id).date
            - bundle.corpus.target_side.sentence(target_id).date
        )
        assert abs(gap.days) <= 2


def test_noise_corrupts_nested_positions() -> None:
    """Test a higher noise rate corrupts a superset of the lower rate's positions."""
    low = generate_synthetic(SynthSpec(**{**vars(SMALL), "noise_rate": 0.2}))
    high = generate_synthetic(SynthSpec(**{**vars(SMALL), "noise_rate": 0.5}))

    assert low.gold == high.gold
    corrupted_low = corrupted_high = 0
    for _, target_id in low.gold.pairs:
        low_tokens = low.corpus.target_side.sentence(target_id).tokens
        high_tokens = high.corpus.target_side.sentence(target_id).tokens
        for a, b in zip(low_tokens, high_tokens, strict=True):
            if a.startswith("tx"):
                assert b == a
            corrupted_low += a.startswith("tx")
            corrupted_high += b.startswith("tx")
    assert corrupted_low <= corrupted_high


def test_distractors_are_never_corrupted() -> None:
    """Test noise only touches planted target sentences."""
    bundle = generate_synthetic(SynthSpec(**{**vars(SMALL), "noise_rate": 0.9}))
    planted = {target_id for _, target_id in bundle.gold.pairs}

    for sentence in bundle.corpus.target_side:
        if sentence.id not in planted:
            assert not any(token.startswith("tx") for token in sentence.tokens)


def test_dictionaries_link_concepts() -> None:
    """Test the generated dictionaries map a concept across all three languages."""
    bundle = generate_synthetic(SMALL)

    assert bundle.source_pivot.alternatives("s7") == (("p7", 1.0),)
    assert bundle.target_pivot.alternatives("t7") == (("p7", 1.0),)
    assert bundle.source_target.alternatives("s7") == (("t7", 1.0),)


def test_ambiguity_adds_second_translation() -> None:
    """Test full ambiguity gives every source word a weaker second reading."""
    bundle = generate_synthetic(SynthSpec(**{**vars(SMALL), "ambiguity": 1.0}))

    options = bundle.source_pivot.alternatives("s7")
    assert len(options) == 2
    assert options[0] == ("p7", pytest.approx(0.7))
    assert len(bundle.target_pivot.alternatives("t7")) == 1


def test_synth_spec_validation() -> None:
    """Test inconsistent generation parameters are rejected."""
    with pytest.raises(ConfigError, match="unknown"):
        SynthSpec.from_dict({"n_parallel": 5, "bogus": 1})
    with pytest.raises(ConfigError):
        SynthSpec(vocab_size=10)
    with pytest.raises(ConfigError):
        SynthSpec(noise_rate=1.0)
    with pytest.raises(ConfigError):
        SynthSpec(comparability="medium")  # type: ignore[arg-type]
    with pytest.raises(ConfigError):
        SynthSpec(start_date="2024-13-01")
    assert SynthSpec.from_dict({"n_parallel": 5}).n_parallel == 5


def test_synth_spec_rejects_too_few_distinct_sentences() -> None:
    """Test a spec that cannot hold enough distinct sentences fails instead of looping."""
    with pytest.raises(ConfigError, match="distinct sentences"):
        SynthSpec(
            n_parallel=3,
            n_distractors_per_side=0,
            n_topics=1,
            topic_size=1,
            vocab_size=2,
            min_length=1,
            max_length=1,
        )


def test_generation_stops_when_topics_run_dry() -> None:
    """Test drawing stops with an error once no unseen sentence is left."""
    spec = SynthSpec(
        n_parallel=4,
        n_distractors_per_side=0,
        n_topics=2,
        topic_size=1,
        vocab_size=3,
        min_length=1,
        max_length=1,
    )

    with pytest.raises(ConfigError, match="no new distinct sentence"):
        generate_synthetic(spec)


def test_write_synthetic_files(tmp_path: Path) -> None:
    """Test the written corpus, gold pairs, dictionaries and spec load back."""
    bundle = generate_synthetic(SMALL)

    paths = write_synthetic(bundle, tmp_path / "synth")

    source = ingest_corpus(paths["source"], "src")
    assert [s.text for s in source] == [s.text for s in bundle.corpus.source_side]
    assert load_gold(paths["gold"]) == bundle.gold
    assert load_dictionary(paths["source_pivot"]).entries == bundle.source_pivot.entries
    spec = json.loads(paths["spec"].read_text(encoding="utf-8"))
    assert SynthSpec.from_dict(spec) == SMALL


def test_score_extraction_counts() -> None:
    """Test precision, recall and F-1 on a partial extraction."""
    gold = GoldAlignment(frozenset({(0, 0), (1, 1), (2, 2), (3, 3)}))

    scores = score_extraction([(0, 0), (1, 1)], gold)

    assert scores.precision == 1.0
    assert scores.recall == 0.5
    assert scores.f1 == pytest.approx(2 / 3)


def test_score_extraction_with_wrong_pairs() -> None:
    """Test wrong pairs lower precision and duplicates count once."""
    gold = GoldAlignment(frozenset({(0, 0), (1, 1)}))

    scores = score_extraction([(0, 0), (0, 0), (1, 5)], gold)

    assert scores.precision == 0.5
    assert scores.recall == 0.5


def test_score_extraction_empty_conventions() -> None:
    """Test empty extractions and empty gold sets."""
    gold = GoldAlignment(frozenset({(0, 0)}))

    assert score_extraction([], gold) == ExtractionScores(1.0, 0.0, 0.0)
    assert score_extraction([], GoldAlignment()).f1 == 1.0
    assert score_extraction([(0, 0)], GoldAlignment()).precision == 0.0


def test_load_extracted_reads_id_columns(tmp_path: Path) -> None:
    """Test extracted corpora are read by their first two columns."""
    path = tmp_path / "pairs.tsv"
    path.write_text("3\t4\t0.100000\ta b\tc d\n\n5\t6\t0.2\te\tf\n", encoding="utf-8")

    assert load_extracted(path) == [(3, 4), (5, 6)]


def test_load_extracted_errors(tmp_path: Path) -> None:
    """Test missing files and non-integer ids raise IngestError."""
    with pytest.raises(IngestError, match="not found"):
        load_extracted(tmp_path / "missing.tsv")

    path = tmp_path / "bad.tsv"
    path.write_text("1\tx\n", encoding="utf-8")
    with pytest.raises(IngestError, match="bad.tsv:1"):
        load_gold(path)


def adapters() -> tuple[SyntheticCorpus, DictionaryAdapter, DictionaryAdapter]:
    bundle = generate_synthetic(SMALL)
    return (
        bundle,
        DictionaryAdapter(bundle.source_pivot, output_lang="pivot"),
        DictionaryAdapter(bundle.target_pivot, output_lang="pivot"),
    )


def test_compare_identical_configurations() -> None:
    """Test two identical configurations produce identical scores."""
    bundle, src, tgt = adapters()
    cfg = PipelineConfig(top_p_output=1.0)

    rows = compare_runs([("a", cfg), ("b", cfg)], bundle.corpus, bundle.gold, src, tgt)

    assert [row.label for row in rows] == ["a", "b"]
    assert (rows[0].precision, rows[0].recall, rows[0].pairs) == (
        rows[1].precision,
        rows[1].recall,
        rows[1].pairs,
    )
    assert rows[0].error is None


def test_compare_lambda_zero_matches_plain_ir() -> None:
    """Test intersection over the whole window with lambda 0 reproduces plain IR."""
    bundle, src, tgt = adapters()
    plain = PipelineConfig(window_days=5, top_k_ir=5, top_p_output=1.0)
    blended = PipelineConfig(
        window_days=5,
        top_k_ir=5,
        modified_ir=True,
        lam=0.0,
        mode="intersection",
        x_percent=1.0,
        m_top_ir=5,
        top_p_output=1.0,
    )

    rows = compare_runs(
        [("plain", plain), ("blended", blended)], bundle.corpus, bundle.gold, src, tgt
    )

    assert rows[0].precision == rows[1].precision
    assert rows[0].recall == rows[1].recall
    assert rows[0].pairs == rows[1].pairs


def test_compare_reports_failing_configuration() -> None:
    """Test a failing configuration yields an error row and others still run."""
    bundle, src, tgt = adapters()

    rows = compare_runs(
        [("bad", PipelineConfig(filter_mode="inverted")), ("good", PipelineConfig())],
        bundle.corpus,
        bundle.gold,
        src,
        tgt,
    )

    assert rows[0].error is not None
    assert rows[0].precision is None
    assert rows[1].error is None
    assert rows[1].pairs is not None


def test_compare_direct_matches_pivot_on_one_to_one_dictionaries() -> None:
    """Test direct retrieval scores like the pivot system when every dictionary is a renaming."""
    bundle = generate_synthetic(SynthSpec(**{**vars(SMALL), "noise_rate": 0.2}))
    src = DictionaryAdapter(bundle.source_pivot, output_lang="pivot")
    tgt = DictionaryAdapter(bundle.target_pivot, output_lang="pivot")
    st = DictionaryAdapter(bundle.source_target, output_lang="tgt")
    configs = [("pivot", PipelineConfig()), ("direct", PipelineConfig(direct=True))]

    pivot, direct = compare_runs(configs, bundle.corpus, bundle.gold, src, tgt, st)

    assert direct.error is None
    assert (direct.precision, direct.recall, direct.pairs) == (
        pivot.precision,
        pivot.recall,
        pivot.pairs,
    )



def test_compare_needs_two_configurations() -> None:
    """Test a single configuration is not a comparison."""
    bundle, src, tgt = adapters()

    with pytest.raises(ConfigError):
        compare_runs([("only", PipelineConfig())], bundle.corpus, bundle.gold, src, tgt)


def test_compare_parallel_keeps_order() -> None:
    """Test parallel comparison returns rows in input order with the same scores."""
    bundle, src, tgt = adapters()
    configs = [("plain", PipelineConfig()), ("ngd", PipelineConfig(ngd_pruning=True))]

    serial = compare_runs(configs, bundle.corpus, bundle.gold, src, tgt)
    parallel = compare_runs(configs, bundle.corpus, bundle.gold, src, tgt, parallel=True)

    assert [r.label for r in parallel] == ["plain", "ngd"]
    assert [(r.precision, r.recall) for r in parallel] == [(r.precision, r.recall) for r in serial]


def test_write_comparison_csv(tmp_path: Path) -> None:
    """Test comparison rows are written under the fixed header."""
    path = tmp_path / "compare.csv"
    rows = [
        ComparisonRow("a", 1.0, 0.5, 2 / 3, 4, 0.25),
        ComparisonRow("b", error="boom"),
    ]

    write_comparison_csv(rows, path)

    with open(path, encoding="utf-8", newline="") as f:
        table = list(csv.reader(f))
    assert tuple(table[0]) == COMPARISON_HEADER
    assert table[1] == ["a", "1.000000", "0.500000", "0.666667", "4", "0.250"]
    assert table[2] == ["b", "", "", "", "", ""]
