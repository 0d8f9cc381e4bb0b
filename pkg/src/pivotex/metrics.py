"""Token edit-distance metrics: WER, TER and TERp.

Every score is an edit cost divided by the reference length. The hypothesis
is edited into the reference: an ``insert`` adds a reference token missing
from the hypothesis, a ``delete`` drops a hypothesis token.
"""

from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from pivotex.errors import IngestError, MetricError


MetricName = Literal["wer", "ter", "terp"]
METRICS: tuple[MetricName, ...] = ("wer", "ter", "terp")

EditOp = Literal["match", "substitute", "insert", "delete", "shift", "stem", "synonym", "phrase"]

MAX_SHIFT_LENGTH = 10
EXHAUSTIVE_SHIFT_LIMIT = 6
COST_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EditStep:
    """One operation of an edit script.

    For ``shift`` steps, ``hyp_pos`` and ``length`` locate the moved block in
    the hypothesis as it was before the move and ``dest`` is its insertion
    index once removed; ``ref_pos`` repeats ``dest``. For ``phrase`` steps,
    ``length`` and ``ref_length`` are the hypothesis and reference phrase
    lengths.
    """

    op: EditOp
    hyp_pos: int
    ref_pos: int
    cost: float
    length: int = 1
    ref_length: int = 1
    dest: int = 0
    ref_tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class EditAlignment:
    """Edit script turning a hypothesis into a reference.

    Attributes:
        steps: Shifts first (in application order), then the edits of the
            shifted hypothesis from left to right
        cost: Total cost of all steps
    """

    steps: tuple[EditStep, ...]
    cost: float

    @property
    def edits(self) -> int:
        """Number of non-match steps."""
        return sum(1 for step in self.steps if step.op != "match")

    @property
    def shifts(self) -> int:
        return sum(1 for step in self.steps if step.op == "shift")

    def matched_hyp_positions(self) -> list[int]:
        """Positions in the (shifted) hypothesis aligned to an equal reference token."""
        return [step.hyp_pos for step in self.steps if step.op == "match"]

    def matched_ref_positions(self) -> list[int]:
        return [step.ref_pos for step in self.steps if step.op == "match"]


@dataclass(frozen=True)
class MetricScore:
    """Normalized edit score of a hypothesis against a reference.

    Attributes:
        metric: Metric name
        value: Edit cost divided by reference length
        cost: Unnormalized edit cost
        ref_length: Reference token count
        shifts: Number of block shifts applied
    """

    metric: MetricName
    value: float
    cost: float
    ref_length: int
    shifts: int = 0


@dataclass(frozen=True)
class TerpWeights:
    """Per-operation costs for TERp."""

    insertion: float = 1.0
    deletion: float = 1.0
    substitution: float = 1.0
    shift: float = 1.0
    stem: float = 0.2
    synonym: float = 0.2

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value < 0:
                raise MetricError(f"TERp weight '{name}' must be non-negative, got {value}")


@dataclass(frozen=True)
class TerpResources:
    """Stem, synonym and phrase resources for TERp.

    Overlapping synonym sets are merged.

    Attributes:
        stem_map: Token to stem
        synonym_sets: Groups of interchangeable tokens
        phrase_table: (phrase, phrase, cost) substitutions, usable both ways
    """

    stem_map: dict[str, str] = field(default_factory=dict)
    synonym_sets: tuple[frozenset[str], ...] = ()
    phrase_table: tuple[tuple[tuple[str, ...], tuple[str, ...], float], ...] = ()
    _synonym_group: dict[str, int] = field(default_factory=dict, repr=False, compare=False)
    _phrases_by_end: dict[str, list[tuple[tuple[str, ...], tuple[str, ...], float]]] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        merged: list[set[str]] = []
        for group in self.synonym_sets:
            overlapping = [m for m in merged if m & group]
            combined = set(group).union(*overlapping)
            merged = [m for m in merged if not m & group]
            merged.append(combined)
        merged.sort(key=lambda m: sorted(m))
        object.__setattr__(self, "synonym_sets", tuple(frozenset(m) for m in merged))
        for gid, group in enumerate(merged):
            for token in group:
                self._synonym_group[token] = gid

        for hyp_phrase, ref_phrase, cost in self.phrase_table:
            if cost < 0:
                raise MetricError(f"phrase cost must be non-negative, got {cost}")
            if not hyp_phrase or not ref_phrase:
                raise MetricError("phrase table entries must not be empty")
            for left, right in ((hyp_phrase, ref_phrase), (ref_phrase, hyp_phrase)):
                self._phrases_by_end.setdefault(left[-1], []).append((left, right, cost))

    @property
    def empty(self) -> bool:
        return not self.stem_map and not self.synonym_sets and not self.phrase_table

    def same_stem(self, a: str, b: str) -> bool:
        return self.stem_map.get(a, a) == self.stem_map.get(b, b)

    def synonyms(self, a: str, b: str) -> bool:
        group = self._synonym_group.get(a)
        return group is not None and group == self._synonym_group.get(b)

    def phrases_ending_with(
        self, token: str
    ) -> list[tuple[tuple[str, ...], tuple[str, ...], float]]:
        return self._phrases_by_end.get(token, [])


def _require_reference(ref: Sequence[str]) -> None:
    if not ref:
        raise MetricError("empty reference")


def edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Unit-cost Levenshtein distance between token sequences."""
    previous = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, start=1):
        current = [i]
        for j, r in enumerate(ref, start=1):
            if h == r:
                current.append(previous[j - 1])
            else:
                current.append(1 + min(previous[j - 1], previous[j], current[j - 1]))
        previous = current
    return previous[-1]


SubCost = Callable[[str, str], tuple[EditOp, float]]


def _unit_sub(a: str, b: str) -> tuple[EditOp, float]:
    return ("match", 0.0) if a == b else ("substitute", 1.0)


def levenshtein_alignment(
    hyp: Sequence[str],
    ref: Sequence[str],
    sub_cost: SubCost = _unit_sub,
    insertion: float = 1.0,
    deletion: float = 1.0,
    resources: TerpResources | None = None,
) -> EditAlignment:
    """Minimum-cost edit script from hyp to ref.

    Ties in the backtrace prefer diagonal steps, then phrases, then
    deletions, then insertions.

    Args:
        hyp: Hypothesis tokens
        ref: Reference tokens
        sub_cost: Operation and cost of aligning two tokens
        insertion: Cost of inserting a reference token
        deletion: Cost of deleting a hypothesis token
        resources: Phrase table source for multi-token substitutions

    Returns:
        Edit alignment without shifts
    """
    n, m = len(hyp), len(ref)
    table = [[0.0] * (m + 1) for _ in range(n + 1)]
    for j in range(1, m + 1):
        table[0][j] = j * insertion
    for i in range(1, n + 1):
        table[i][0] = i * deletion
        for j in range(1, m + 1):
            _, diagonal = sub_cost(hyp[i - 1], ref[j - 1])
            best = min(
                table[i - 1][j - 1] + diagonal,
                table[i - 1][j] + deletion,
                table[i][j - 1] + insertion,
            )
            if resources is not None:
                for left, right, cost in resources.phrases_ending_with(hyp[i - 1]):
                    if _phrase_fits(hyp, ref, i, j, left, right):
                        best = min(best, table[i - len(left)][j - len(right)] + cost)
            table[i][j] = best

    steps: list[EditStep] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = table[i][j]
        if i > 0 and j > 0:
            op, diagonal = sub_cost(hyp[i - 1], ref[j - 1])
            if abs(table[i - 1][j - 1] + diagonal - here) <= COST_TOLERANCE:
                steps.append(EditStep(op, i - 1, j - 1, diagonal, ref_tokens=(ref[j - 1],)))
                i, j = i - 1, j - 1
                continue
        if resources is not None and i > 0:
            phrase = _phrase_step(table, hyp, ref, i, j, resources)
            if phrase is not None:
                steps.append(phrase)
                i, j = i - phrase.length, j - phrase.ref_length
                continue
        if i > 0 and abs(table[i - 1][j] + deletion - here) <= COST_TOLERANCE:
            steps.append(EditStep("delete", i - 1, j, deletion, ref_tokens=()))
            i -= 1
            continue
        steps.append(EditStep("insert", i, j - 1, insertion, ref_tokens=(ref[j - 1],)))
        j -= 1

    steps.reverse()
    return EditAlignment(tuple(steps), table[n][m])


def _phrase_fits(
    hyp: Sequence[str],
    ref: Sequence[str],
    i: int,
    j: int,
    left: tuple[str, ...],
    right: tuple[str, ...],
) -> bool:
    if len(left) > i or len(right) > j:
        return False
    return tuple(hyp[i - len(left) : i]) == left and tuple(ref[j - len(right) : j]) == right


def _phrase_step(
    table: list[list[float]],
    hyp: Sequence[str],
    ref: Sequence[str],
    i: int,
    j: int,
    resources: TerpResources,
) -> EditStep | None:
    for left, right, cost in resources.phrases_ending_with(hyp[i - 1]):
        if not _phrase_fits(hyp, ref, i, j, left, right):
            continue
        if abs(table[i - len(left)][j - len(right)] + cost - table[i][j]) <= COST_TOLERANCE:
            return EditStep(
                "phrase",
                i - len(left),
                j - len(right),
                cost,
                length=len(left),
                ref_length=len(right),
                ref_tokens=right,
            )
    return None


def replay(hyp: Sequence[str], alignment: EditAlignment) -> tuple[str, ...]:
    """Apply an edit script to a hypothesis and return the edited tokens."""
    tokens = list(hyp)
    output: list[str] = []
    for step in alignment.steps:
        if step.op == "shift":
            block = tokens[step.hyp_pos : step.hyp_pos + step.length]
            rest = tokens[: step.hyp_pos] + tokens[step.hyp_pos + step.length :]
            tokens = rest[: step.dest] + block + rest[step.dest :]
        elif step.op == "match":
            output.append(tokens[step.hyp_pos])
        elif step.op != "delete":
            output.extend(step.ref_tokens)
    return tuple(output)


def wer(hyp: Sequence[str], ref: Sequence[str]) -> MetricScore:
    """Word error rate: Levenshtein distance over tokens divided by |ref|.

    Raises:
        MetricError: If ref is empty
    """
    _require_reference(ref)
    cost = edit_distance(hyp, ref)
    return MetricScore("wer", cost / len(ref), float(cost), len(ref))


def _error_positions(hyp: Sequence[str], ref: Sequence[str]) -> tuple[set[int], set[int]]:
    """Hypothesis and reference positions not covered by a match."""
    alignment = levenshtein_alignment(hyp, ref)
    hyp_errors = set(range(len(hyp)))
    ref_errors = set(range(len(ref)))
    for step in alignment.steps:
        if step.op == "match":
            hyp_errors.discard(step.hyp_pos)
            ref_errors.discard(step.ref_pos)
    return hyp_errors, ref_errors


def shift_candidates(hyp: Sequence[str], ref: Sequence[str]) -> Iterable[tuple[int, int, int]]:
    """Yield admissible block moves as (start, length, dest).

    A block of at most MAX_SHIFT_LENGTH hypothesis tokens may move when it
    equals a reference span, contains a hypothesis error and the reference
    span contains an error. It is reinserted, after removal, at the index of
    the reference span's start.
    """
    hyp_errors, ref_errors = _error_positions(hyp, ref)
    starts: dict[str, list[int]] = {}
    for j, token in enumerate(ref):
        starts.setdefault(token, []).append(j)

    seen: set[tuple[int, int, int]] = set()
    for i in range(len(hyp)):
        for j in starts.get(hyp[i], ()):
            for k in range(1, min(MAX_SHIFT_LENGTH, len(hyp) - i, len(ref) - j) + 1):
                if hyp[i + k - 1] != ref[j + k - 1]:
                    break
                if not any(p in hyp_errors for p in range(i, i + k)):
                    continue
                if not any(p in ref_errors for p in range(j, j + k)):
                    continue
                dest = min(j, len(hyp) - k)
                rest = list(hyp[:i]) + list(hyp[i + k :])
                moved = tuple(rest[:dest]) + tuple(hyp[i : i + k]) + tuple(rest[dest:])
                if moved == tuple(hyp) or (i, dest, k) in seen:
                    continue
                seen.add((i, dest, k))
                yield i, k, dest


def _apply_shift(hyp: Sequence[str], start: int, length: int, dest: int) -> tuple[str, ...]:
    rest = tuple(hyp[:start]) + tuple(hyp[start + length :])
    return rest[:dest] + tuple(hyp[start : start + length]) + rest[dest:]


def greedy_shifts(hyp: Sequence[str], ref: Sequence[str]) -> tuple[list[EditStep], tuple[str, ...]]:
    """Repeatedly apply the block shift that most reduces the edit distance.

    Ties go to the earliest block start, then the earliest destination, then
    the longest block. Stops when no shift lowers the distance.

    Returns:
        Applied shift steps and the shifted hypothesis
    """
    current = tuple(hyp)
    distance = edit_distance(current, ref)
    steps: list[EditStep] = []

    while distance > 0:
        best: tuple[int, int, int, int] | None = None
        best_key: tuple[int, int, int, int] | None = None
        for start, length, dest in shift_candidates(current, ref):
            moved = _apply_shift(current, start, length, dest)
            gain = distance - edit_distance(moved, ref)
            key = (-gain, start, dest, -length)
            if gain > 0 and (best_key is None or key < best_key):
                best, best_key = (start, length, dest, gain), key
        if best is None:
            break
        start, length, dest, gain = best
        steps.append(EditStep("shift", start, dest, 1.0, length=length, dest=dest))
        current = _apply_shift(current, start, length, dest)
        distance -= gain

    return steps, current


def exhaustive_shifts(
    hyp: Sequence[str], ref: Sequence[str]
) -> tuple[list[EditStep], tuple[str, ...]]:
    """Find the shift sequence minimising shifts plus edit distance.

    Breadth-first search over every block move, each reachable ordering
    visited once at its smallest shift count. Search stops once another shift
    cannot beat the best cost found. Ties go to fewer shifts, then to the
    ordering reached first.

    Returns:
        Applied shift steps and the shifted hypothesis
    """
    start_tokens = tuple(hyp)
    parents: dict[tuple[str, ...], tuple[tuple[str, ...], int, int, int] | None] = {
        start_tokens: None
    }
    best_tokens = start_tokens
    best_cost = edit_distance(start_tokens, ref)
    # Shifts keep the token multiset, which bounds the edit distance from below.
    floor = max(len(hyp), len(ref)) - sum((Counter(hyp) & Counter(ref)).values())
    frontier = [start_tokens]
    depth = 0

    while frontier and depth + 1 + floor < best_cost:
        depth += 1
        reached: list[tuple[str, ...]] = []
        for tokens in frontier:
            for start in range(len(tokens)):
                for length in range(1, min(MAX_SHIFT_LENGTH, len(tokens) - start) + 1):
                    for dest in range(len(tokens) - length + 1):
                        moved = _apply_shift(tokens, start, length, dest)
                        if moved in parents:
                            continue
                        parents[moved] = (tokens, start, length, dest)
                        reached.append(moved)
                        cost = depth + edit_distance(moved, ref)
                        if cost < best_cost:
                            best_tokens, best_cost = moved, cost
        frontier = reached

    steps: list[EditStep] = []
    tokens = best_tokens
    while (link := parents[tokens]) is not None:
        tokens, start, length, dest = link
        steps.append(EditStep("shift", start, dest, 1.0, length=length, dest=dest))
    steps.reverse()
    return steps, best_tokens


def ter_shifts(hyp: Sequence[str], ref: Sequence[str]) -> tuple[list[EditStep], tuple[str, ...]]:
    """Shift search used by TER and TERp.

    Hypotheses of at most EXHAUSTIVE_SHIFT_LIMIT tokens get the exact optimum,
    longer ones the greedy search.
    """
    if len(hyp) <= EXHAUSTIVE_SHIFT_LIMIT:
        return exhaustive_shifts(hyp, ref)
    return greedy_shifts(hyp, ref)


def ter_alignment(hyp: Sequence[str], ref: Sequence[str]) -> EditAlignment:
    """Full TER edit script: block shifts followed by unit-cost edits."""
    shifts, shifted = ter_shifts(hyp, ref)
    edits = levenshtein_alignment(shifted, ref)
    return EditAlignment(tuple(shifts) + edits.steps, len(shifts) + edits.cost)


def ter(hyp: Sequence[str], ref: Sequence[str]) -> MetricScore:
    """Translation edit rate: (shifts + edits) / |ref| with block shifts.

    Raises:
        MetricError: If ref is empty
    """
    _require_reference(ref)
    shifts, shifted = ter_shifts(hyp, ref)
    cost = len(shifts) + edit_distance(shifted, ref)
    return MetricScore("ter", cost / len(ref), float(cost), len(ref), len(shifts))


def _terp_sub(resources: TerpResources, weights: TerpWeights) -> SubCost:
    def cost(a: str, b: str) -> tuple[EditOp, float]:
        if a == b:
            return "match", 0.0
        if resources.same_stem(a, b):
            return "stem", weights.stem
        if resources.synonyms(a, b):
            return "synonym", weights.synonym
        return "substitute", weights.substitution

    return cost


def terp_alignment(
    hyp: Sequence[str],
    ref: Sequence[str],
    resources: TerpResources | None = None,
    weights: TerpWeights | None = None,
) -> EditAlignment:
    """TERp edit script: TER's shifts, then a weighted edit script."""
    res = resources if resources is not None else TerpResources()
    w = weights if weights is not None else TerpWeights()
    shifts, shifted = ter_shifts(hyp, ref)
    shift_steps = tuple(
        EditStep("shift", s.hyp_pos, s.ref_pos, w.shift, length=s.length, dest=s.dest)
        for s in shifts
    )
    edits = levenshtein_alignment(
        shifted,
        ref,
        sub_cost=_terp_sub(res, w),
        insertion=w.insertion,
        deletion=w.deletion,
        resources=res if res.phrase_table else None,
    )
    return EditAlignment(shift_steps + edits.steps, len(shifts) * w.shift + edits.cost)


def terp(
    hyp: Sequence[str],
    ref: Sequence[str],
    resources: TerpResources | None = None,
    weights: TerpWeights | None = None,
) -> MetricScore:
    """TER-plus: TER with stem, synonym and phrase substitutions at reduced cost.

    Args:
        hyp: Hypothesis tokens
        ref: Reference tokens
        resources: Stem map, synonym sets and phrase table (empty by default)
        weights: Operation costs

    Returns:
        Weighted edit cost divided by |ref|

    Raises:
        MetricError: If ref is empty
    """
    _require_reference(ref)
    alignment = terp_alignment(hyp, ref, resources, weights)
    return MetricScore(
        "terp", alignment.cost / len(ref), alignment.cost, len(ref), alignment.shifts
    )


def load_stems(path: str | Path) -> dict[str, str]:
    """Read ``token<TAB>stem`` lines."""
    stems: dict[str, str] = {}
    for line_no, fields in _tsv_lines(path):
        if len(fields) != 2:
            raise IngestError("expected 'token<TAB>stem'", str(path), line_no)
        stems[fields[0].lower()] = fields[1].lower()
    return stems


def load_synonyms(path: str | Path) -> tuple[frozenset[str], ...]:
    """Read one comma-separated synonym set per line."""
    groups: list[frozenset[str]] = []
    for _, fields in _tsv_lines(path):
        words = frozenset(w.strip().lower() for w in "\t".join(fields).split(",") if w.strip())
        if len(words) > 1:
            groups.append(words)
    return tuple(groups)


def load_phrase_table(
    path: str | Path,
) -> tuple[tuple[tuple[str, ...], tuple[str, ...], float], ...]:
    """Read ``phrase<TAB>phrase<TAB>cost`` lines."""
    entries: list[tuple[tuple[str, ...], tuple[str, ...], float]] = []
    for line_no, fields in _tsv_lines(path):
        if len(fields) != 3:
            raise IngestError("expected 'phrase<TAB>phrase<TAB>cost'", str(path), line_no)
        try:
            cost = float(fields[2])
        except ValueError:
            raise IngestError(f"invalid cost '{fields[2]}'", str(path), line_no) from None
        left, right = tuple(fields[0].lower().split()), tuple(fields[1].lower().split())
        if not left or not right or cost < 0:
            raise IngestError("phrases must be non-empty with a non-negative cost", str(path), line_no)
        entries.append((left, right, cost))
    return tuple(entries)


def _tsv_lines(path: str | Path) -> list[tuple[int, list[str]]]:
    try:
        with open(path, encoding="utf-8") as f:
            return [
                (line_no, line.rstrip("\n").split("\t"))
                for line_no, line in enumerate(f, start=1)
                if line.strip() and not line.startswith("#")
            ]
    except FileNotFoundError:
        raise IngestError("resource file not found", str(path)) from None


def load_terp_resources(
    stems: str | Path | None = None,
    synonyms: str | Path | None = None,
    phrases: str | Path | None = None,
) -> TerpResources:
    """Load whichever TERp resource files are given."""
    return TerpResources(
        stem_map=load_stems(stems) if stems else {},
        synonym_sets=load_synonyms(synonyms) if synonyms else (),
        phrase_table=load_phrase_table(phrases) if phrases else (),
    )


def score(
    metric: MetricName,
    hyp: Sequence[str],
    ref: Sequence[str],
    resources: TerpResources | None = None,
    weights: TerpWeights | None = None,
) -> MetricScore:
    """Dispatch to the named metric."""
    if metric == "wer":
        return wer(hyp, ref)
    if metric == "ter":
        return ter(hyp, ref)
    if metric == "terp":
        return terp(hyp, ref, resources, weights)
    raise MetricError(f"unknown metric '{metric}'")
