"""End-to-end tests of the pivotex command line."""

import json
import os
import subprocess
import sys
from pathlib import Path


PROJECT_ROOT = os.path.join(os.path.dirname(__file__), "..")
FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures")
SOURCE = os.path.join(FIXTURES_DIR, "source.jsonl")
TARGET = os.path.join(FIXTURES_DIR, "target.jsonl")
GOLD = os.path.join(FIXTURES_DIR, "gold.tsv")


def run_cli(*args: str) -> subprocess.CompletedProcess[str]:
    return subprocess.run(
        [sys.executable, "-m", "pivotex", *args],
        cwd=PROJECT_ROOT,
        capture_output=True,
        text=True,
    )


def test_extract_writes_corpus_and_report(tmp_path: Path) -> None:
    """Test extract emits every in-window copy and summarizes the run."""
    out = tmp_path / "pairs.tsv"

    result = run_cli(
        "extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(out), "--top-p", "1", "--no-color"
    )

    assert result.returncode == 0, result.stderr
    assert "Pairs emitted: 3" in result.stdout
    assert "Stages:" in result.stdout
    assert "Scores:" in result.stdout
    ids = [tuple(line.split("\t")[:2]) for line in out.read_text(encoding="utf-8").splitlines()]
    assert ids == [("0", "1"), ("1", "0"), ("2", "2")]
    report = json.loads(Path(f"{out}.report.json").read_text(encoding="utf-8"))
    assert report["pairs_emitted"] == 3


def test_extract_then_evaluate(tmp_path: Path) -> None:
    """Test an extracted corpus scores perfectly against its gold pairs."""
    out = tmp_path / "pairs.tsv"
    run_cli("extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(out), "--top-p", "1")

    result = run_cli("evaluate", "--extracted", str(out), "--gold", GOLD, "--no-color")

    assert result.returncode == 0, result.stderr
    assert "Precision: 1.0000" in result.stdout
    assert "Recall: 1.0000" in result.stdout
    assert "F1: 1.0000" in result.stdout


def test_default_output_fraction(tmp_path: Path) -> None:
    """Test the default run keeps the best half of ranked pairs, rounded up."""
    out = tmp_path / "pairs.tsv"

    result = run_cli("extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(out))

    assert result.returncode == 0, result.stderr
    assert len(out.read_text(encoding="utf-8").splitlines()) == 2


def test_color_flags(tmp_path: Path) -> None:
    """Test --color adds escape codes and --no-color removes them."""
    out = str(tmp_path / "pairs.tsv")

    colored = run_cli("extract", "--src", SOURCE, "--tgt", TARGET, "--out", out, "--color")
    plain = run_cli("extract", "--src", SOURCE, "--tgt", TARGET, "--out", out, "--no-color")

    assert "\x1b[" in colored.stdout
    assert "\x1b[" not in plain.stdout


def test_gen_synthetic_then_extract(tmp_path: Path) -> None:
    """Test a generated corpus can be extracted with its dictionaries and scored."""
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps(
            {
                "n_parallel": 10,
                "n_distractors_per_side": 40,
                "span_days": 10,
                "n_topics": 4,
                "topic_size": 5,
                "vocab_size": 80,
            }
        ),
        encoding="utf-8",
    )
    data = tmp_path / "synth"

    generated = run_cli("gen-synthetic", "--spec", str(spec), "--out-dir", str(data), "--seed", "7")

    assert generated.returncode == 0, generated.stderr
    assert "Planted pairs: 10" in generated.stdout
    assert "Source sentences: 50" in generated.stdout
    saved_spec = json.loads((data / "spec.json").read_text(encoding="utf-8"))
    assert saved_spec["seed"] == 7

    out = tmp_path / "pairs.tsv"
    extracted = run_cli(
        "extract",
        "--src", str(data / "source.jsonl"),
        "--tgt", str(data / "target.jsonl"),
        "--src-dict", str(data / "source-pivot.dict"),
        "--tgt-dict", str(data / "target-pivot.dict"),
        "--out", str(out),
        "--no-color",
    )
    assert extracted.returncode == 0, extracted.stderr

    scored = run_cli("evaluate", "--extracted", str(out), "--gold", str(data / "gold.tsv"))
    assert scored.returncode == 0, scored.stderr
    assert "Precision:" in scored.stdout


def test_compare_prints_and_writes_rows(tmp_path: Path) -> None:
    """Test compare runs every labelled configuration and writes a CSV table."""
    out = tmp_path / "compare.csv"

    result = run_cli(
        "compare",
        "--src", SOURCE,
        "--tgt", TARGET,
        "--gold", GOLD,
        "--configs", os.path.join(FIXTURES_DIR, "runs.json"),
        "--out", str(out),
        "--no-color",
    )

    assert result.returncode == 0, result.stderr
    assert "Runs:" in result.stdout
    for label in ("plain", "wer", "ngd"):
        assert label in result.stdout
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "label,precision,recall,f1,pairs,seconds"
    assert [line.split(",")[0] for line in lines[1:]] == ["plain", "wer", "ngd"]


def test_missing_corpus_file(tmp_path: Path) -> None:
    """Test a missing input file is reported as an error."""
    result = run_cli(
        "extract", "--src", str(tmp_path / "nope.jsonl"), "--tgt", TARGET, "--out", str(tmp_path / "o")
    )

    assert result.returncode == 1
    assert "Error:" in result.stderr
    assert "nope.jsonl" in result.stderr


def test_inverted_mode_needs_source_target_adapter(tmp_path: Path) -> None:
    """Test inverted filtering without a source-target adapter fails cleanly."""
    result = run_cli(
        "extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(tmp_path / "o"),
        "--filter-mode", "inverted",
    )

    assert result.returncode == 1
    assert "Error: --filter-mode inverted needs" in result.stderr


def test_direct_extract_from_synthetic_corpus(tmp_path: Path) -> None:
    """Test direct retrieval runs end to end with the generated source-target dictionary."""
    data = tmp_path / "synth"
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps({"n_parallel": 6, "n_distractors_per_side": 20, "vocab_size": 500}),
        encoding="utf-8",
    )
    run_cli("gen-synthetic", "--spec", str(spec), "--out-dir", str(data))
    out = tmp_path / "pairs.tsv"

    result = run_cli(
        "extract",
        "--src", str(data / "source.jsonl"),
        "--tgt", str(data / "target.jsonl"),
        "--st-dict", str(data / "source-target.dict"),
        "--direct",
        "--top-p", "1",
        "--out", str(out),
        "--no-color",
    )

    assert result.returncode == 0, result.stderr
    report = json.loads(Path(f"{out}.report.json").read_text(encoding="utf-8"))
    assert report["config"]["direct"] is True
    scored = run_cli("evaluate", "--extracted", str(out), "--gold", str(data / "gold.tsv"))
    assert "Recall: 1.0000" in scored.stdout


def test_direct_needs_source_target_adapter(tmp_path: Path) -> None:
    """Test direct retrieval without a source-target adapter fails cleanly."""
    result = run_cli(
        "extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(tmp_path / "o"), "--direct"
    )

    assert result.returncode == 1
    assert "Error: --direct needs" in result.stderr


def test_invalid_pipeline_value(tmp_path: Path) -> None:
    """Test an out-of-range tunable is rejected before any work."""
    result = run_cli(
        "extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(tmp_path / "o"), "--lambda", "2"
    )

    assert result.returncode == 1
    assert "lambda" in result.stderr


def test_buckets_minimum(tmp_path: Path) -> None:
    """Test charts need at least 20 buckets."""
    result = run_cli(
        "extract", "--src", SOURCE, "--tgt", TARGET, "--out", str(tmp_path / "o"), "--buckets", "5"
    )

    assert result.returncode == 1
    assert "Error: --buckets must be at least 20" in result.stderr


def test_unknown_command() -> None:
    """Test a missing subcommand is a usage error."""
    result = run_cli()

    assert result.returncode == 2
    assert "usage:" in result.stderr
