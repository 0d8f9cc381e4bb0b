"""Tests for WER, TER and TERp."""

import random
from pathlib import Path

import pytest

from pivotex.errors import IngestError, MetricError
from pivotex.metrics import (
    EXHAUSTIVE_SHIFT_LIMIT,
    MAX_SHIFT_LENGTH,
    METRICS,
    TerpResources,
    TerpWeights,
    greedy_shifts,
    levenshtein_alignment,
    load_phrase_table,
    load_synonyms,
    load_terp_resources,
    replay,
    score,
    shift_candidates,
    ter,
    ter_alignment,
    ter_shifts,
    terp,
    terp_alignment,
    wer,
)
from tests.oracles import brute_force_edit_distance, optimal_shift_cost


def toks(text: str) -> tuple[str, ...]:
    return tuple(text.split())


def random_pairs(count: int, seed: int) -> list[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Short random token sequences over a tiny vocabulary."""
    rng = random.Random(seed)
    vocab = ["a", "b", "c", "d"]
    pairs = []
    for _ in range(count):
        hyp = tuple(rng.choice(vocab) for _ in range(rng.randint(0, 6)))
        ref = tuple(rng.choice(vocab) for _ in range(rng.randint(1, 6)))
        pairs.append((hyp, ref))
    return pairs


def test_wer_single_insertion() -> None:
    """Test a missing final word costs one edit over the reference length."""
    result = wer(toks("the cat sat"), toks("the cat sat down"))

    assert result.value == pytest.approx(0.25)
    assert result.cost == 1.0
    assert result.ref_length == 4


def test_wer_identical_is_zero() -> None:
    """Test identical sequences have zero error."""
    assert wer(toks("a b c"), toks("a b c")).value == 0.0


def test_wer_can_exceed_one() -> None:
    """Test a long hypothesis against a short reference scores above 1."""
    assert wer(toks("x y z w"), toks("a")).value == pytest.approx(4.0)


def test_wer_matches_recursive_distance() -> None:
    """Test WER cost agrees with a recursive Levenshtein distance."""
    for hyp, ref in random_pairs(500, seed=1):
        assert wer(hyp, ref).cost == brute_force_edit_distance(hyp, ref)


def test_empty_reference_is_rejected() -> None:
    """Test every metric rejects an empty reference."""
    for metric in METRICS:
        with pytest.raises(MetricError, match="empty reference"):
            score(metric, toks("a"), ())


def test_empty_hypothesis_scores_one() -> None:
    """Test an empty hypothesis needs one insertion per reference token."""
    assert ter((), toks("a b c")).value == pytest.approx(1.0)
    assert wer((), toks("a b c")).value == pytest.approx(1.0)


def test_ter_block_swap_uses_one_shift() -> None:
    """Test swapping two halves costs a single shift."""
    result = ter(toks("a b c d"), toks("c d a b"))

    assert result.shifts == 1
    assert result.cost == 1.0
    assert result.value == pytest.approx(0.25)
    assert wer(toks("a b c d"), toks("c d a b")).value == pytest.approx(1.0)


def test_ter_shift_choice_prefers_earliest_block() -> None:
    """Test ties between equally good shifts go to the earliest block start."""
    steps, shifted = greedy_shifts(toks("a b c d"), toks("c d a b"))

    assert shifted == toks("c d a b")
    assert [(s.hyp_pos, s.length, s.dest) for s in steps] == [(0, 2, 2)]


def test_ter_identical_has_no_shifts() -> None:
    """Test identical sequences need neither shifts nor edits."""
    result = ter(toks("a b c"), toks("a b c"))

    assert result.value == 0.0
    assert result.shifts == 0


def test_ter_matches_exhaustive_shift_search() -> None:
    """Test TER on short inputs equals the best cost over all shift sequences."""
    for hyp, ref in random_pairs(500, seed=7):
        cost = ter(hyp, ref).cost
        assert cost == optimal_shift_cost(hyp, ref)
        assert cost <= wer(hyp, ref).cost


def test_ter_finds_unconstrained_optimum() -> None:
    """Test a block move the greedy search rules out is found on short inputs."""
    hyp, ref = toks("d d a d c b"), toks("a b d d a")

    assert ter(hyp, ref).cost == 3.0
    assert replay(hyp, ter_alignment(hyp, ref)) == ref


def test_long_hypotheses_use_greedy_shifts() -> None:
    """Test hypotheses above the exhaustive limit fall back to greedy shifts."""
    hyp = toks("a b c d e f g h")
    ref = toks("e f g h a b c d")

    assert len(hyp) > EXHAUSTIVE_SHIFT_LIMIT
    assert ter_shifts(hyp, ref) == greedy_shifts(hyp, ref)
    assert ter(hyp, ref).cost == 1.0


def test_shift_candidates_respect_limits() -> None:
    """Test candidate blocks never exceed the maximum shift length."""
    hyp = tuple(f"w{i}" for i in range(14)) + ("x",)
    ref = ("x",) + tuple(f"w{i}" for i in range(14))

    for _, length, dest in shift_candidates(hyp, ref):
        assert 1 <= length <= MAX_SHIFT_LENGTH
        assert 0 <= dest <= len(hyp) - length


def test_ter_long_block_moves_single_token() -> None:
    """Test a displaced token is moved rather than deleted and reinserted."""
    hyp = tuple(f"w{i}" for i in range(14)) + ("x",)
    ref = ("x",) + tuple(f"w{i}" for i in range(14))

    result = ter(hyp, ref)

    assert result.shifts == 1
    assert result.cost == 1.0


def test_ter_alignment_replays_to_reference() -> None:
    """Test applying a TER edit script to the hypothesis yields the reference."""
    for hyp, ref in random_pairs(40, seed=3):
        alignment = ter_alignment(hyp, ref)
        assert replay(hyp, alignment) == ref
        assert alignment.cost == ter(hyp, ref).cost


def test_levenshtein_alignment_marks_matches() -> None:
    """Test matched positions point at equal tokens."""
    hyp, ref = toks("a x c"), toks("a b c")

    alignment = levenshtein_alignment(hyp, ref)

    assert alignment.cost == 1.0
    assert alignment.matched_hyp_positions() == [0, 2]
    assert alignment.matched_ref_positions() == [0, 2]
    assert alignment.edits == 1


def test_terp_without_resources_equals_ter() -> None:
    """Test TERp with unit weights and no resources reduces to TER."""
    for hyp, ref in random_pairs(30, seed=11):
        assert terp(hyp, ref).cost == pytest.approx(ter(hyp, ref).cost)


def test_terp_stem_match_is_cheap() -> None:
    """Test tokens sharing a stem substitute at the stem cost."""
    resources = TerpResources(stem_map={"runs": "run", "running": "run"})

    result = terp(toks("he runs"), toks("he running"), resources)

    assert result.value == pytest.approx(0.1)
    steps = terp_alignment(toks("he runs"), toks("he running"), resources).steps
    assert [s.op for s in steps] == ["match", "stem"]


def test_terp_synonym_match_is_cheap() -> None:
    """Test synonyms substitute at the synonym cost."""
    resources = TerpResources(synonym_sets=(frozenset({"big", "large"}),))

    assert terp(toks("big house"), toks("large house"), resources).value == pytest.approx(0.1)


def test_terp_merges_overlapping_synonym_sets() -> None:
    """Test synonym sets sharing a member become one group."""
    resources = TerpResources(
        synonym_sets=(frozenset({"big", "large"}), frozenset({"large", "huge"}))
    )

    assert resources.synonyms("big", "huge")
    assert len(resources.synonym_sets) == 1


def test_terp_phrase_substitution() -> None:
    """Test a phrase-table entry replaces several edits with its cost."""
    resources = TerpResources(phrase_table=((("nyc",), ("new", "york"), 0.3),))
    hyp, ref = toks("i love nyc"), toks("i love new york")

    result = terp(hyp, ref, resources)

    assert result.cost == pytest.approx(0.3)
    assert replay(hyp, terp_alignment(hyp, ref, resources)) == ref
    assert terp(ref, hyp, resources).cost == pytest.approx(0.3)


def test_terp_weights_scale_costs() -> None:
    """Test operation weights change the edit cost."""
    weights = TerpWeights(substitution=0.5)

    assert terp(toks("a b"), toks("a c"), weights=weights).cost == pytest.approx(0.5)


def test_terp_weights_must_be_non_negative() -> None:
    """Test negative weights are rejected."""
    with pytest.raises(MetricError):
        TerpWeights(shift=-1.0)


def test_load_resources(tmp_path: Path) -> None:
    """Test TERp resource files load into one resource bundle."""
    stems = tmp_path / "stems.tsv"
    stems.write_text("Runs\trun\nrunning\trun\n", encoding="utf-8")
    synonyms = tmp_path / "syn.txt"
    synonyms.write_text("big, large\nalone\n", encoding="utf-8")
    phrases = tmp_path / "phrases.tsv"
    phrases.write_text("nyc\tnew york\t0.3\n", encoding="utf-8")

    resources = load_terp_resources(stems, synonyms, phrases)

    assert resources.same_stem("runs", "running")
    assert resources.synonyms("big", "large")
    assert load_synonyms(synonyms) == (frozenset({"big", "large"}),)
    assert load_phrase_table(phrases) == ((("nyc",), ("new", "york"), 0.3),)
    assert not resources.empty


def test_load_phrase_table_rejects_bad_cost(tmp_path: Path) -> None:
    """Test a non-numeric phrase cost names the offending line."""
    phrases = tmp_path / "phrases.tsv"
    phrases.write_text("a\tb\tcheap\n", encoding="utf-8")

    with pytest.raises(IngestError, match="invalid cost"):
        load_phrase_table(phrases)


def test_score_dispatch() -> None:
    """Test score routes to the named metric."""
    hyp, ref = toks("a b c d"), toks("c d a b")

    assert score("wer", hyp, ref).metric == "wer"
    assert score("ter", hyp, ref).value == pytest.approx(0.25)
    assert score("terp", hyp, ref).value == pytest.approx(0.25)


def test_ter_adjacent_swap_is_one_shift() -> None:
    """Test swapping two tokens costs one shift where WER needs two edits."""
    assert ter(toks("b a"), toks("a b")).value == pytest.approx(0.5)
    assert wer(toks("b a"), toks("a b")).value == pytest.approx(1.0)


def test_metrics_are_not_symmetric() -> None:
    """Test normalizing by the reference makes the direction matter."""
    hyp, ref = toks("a b c d"), toks("a b")

    assert wer(hyp, ref).value == pytest.approx(1.0)
    assert wer(ref, hyp).value == pytest.approx(0.5)
