"""Translation adapters mapping sentences into the pivot (or target) language."""

import logging
import math
import shlex
import subprocess
import threading
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Protocol, runtime_checkable

from tqdm import tqdm

from pivotex.corpus import CorpusSide, Sentence, tokenize
from pivotex.errors import DictionaryError, IngestError, TranslationError


logger = logging.getLogger(__name__)

OovPolicy = Literal["copy", "drop"]

PROBABILITY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TranslationHypothesis:
    """One ranked translation of a sentence.

    Attributes:
        origin_id: Id of the translated sentence
        tokens: Output-language tokens
        score: Model score, higher is better
    """

    origin_id: int
    tokens: tuple[str, ...]
    score: float


@runtime_checkable
class TranslationAdapter(Protocol):
    """Contract for anything that translates sentences into one output language.

    Adapters with ``concurrent = False`` are called from one thread at a time.
    """

    @property
    def output_lang(self) -> str: ...

    @property
    def concurrent(self) -> bool: ...

    def translate(
        self, sentence: Sentence, n_best: int, seed: int
    ) -> list[TranslationHypothesis]: ...


@dataclass(frozen=True)
class IdentityAdapter:
    """Adapter for sentences already written in the output language."""

    output_lang: str = "en"
    concurrent: bool = True

    def translate(
        self,
        sentence: Sentence,
        n_best: int,  # noqa: ARG002
        seed: int,  # noqa: ARG002
    ) -> list[TranslationHypothesis]:
        """Return the sentence tokens unchanged as the single hypothesis."""
        return [TranslationHypothesis(sentence.id, sentence.tokens, 0.0)]


@dataclass(frozen=True)
class ProbDictionary:
    """Word translation table with per-word probabilities.

    Attributes:
        entries: Source token to (translation, probability) pairs
        oov_policy: What to do with tokens missing from entries
    """

    entries: Mapping[str, tuple[tuple[str, float], ...]]
    oov_policy: OovPolicy = "copy"

    def __post_init__(self) -> None:
        for token, options in self.entries.items():
            if not options:
                raise DictionaryError(f"entry '{token}' has no translations")
            if any(p <= 0.0 for _, p in options):
                raise DictionaryError(f"entry '{token}' has a non-positive probability")
            total = math.fsum(p for _, p in options)
            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise DictionaryError(
                    f"probabilities of entry '{token}' sum to {total!r}, expected 1"
                )
            if len({t for t, _ in options}) != len(options):
                raise DictionaryError(f"entry '{token}' lists a translation twice")
        if self.oov_policy not in ("copy", "drop"):
            raise DictionaryError(f"unknown OOV policy '{self.oov_policy}'")

    def alternatives(self, token: str) -> tuple[tuple[str, float], ...]:
        """Return translations of token by descending probability, ties by token."""
        options = self.entries.get(token, ())
        return tuple(sorted(options, key=lambda option: (-option[1], option[0])))


def build_dictionary(
    triples: Iterable[tuple[str, str, float]],
    oov_policy: OovPolicy = "copy",
    normalize: bool = False,
) -> ProbDictionary:
    """Build a dictionary from (source, translation, probability) triples.

    Repeated (source, translation) pairs have their probabilities summed.

    Args:
        triples: Dictionary rows
        oov_policy: Policy for tokens missing from the table
        normalize: Rescale each entry's probabilities to sum to 1

    Returns:
        Validated dictionary

    Raises:
        DictionaryError: If an entry violates the probability invariants
    """
    grouped: dict[str, dict[str, float]] = {}
    for source, target, probability in triples:
        options = grouped.setdefault(source, {})
        options[target] = options.get(target, 0.0) + probability

    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    for source, options in grouped.items():
        total = math.fsum(options.values())
        if normalize and total > 0:
            entries[source] = tuple((t, p / total) for t, p in sorted(options.items()))
        else:
            entries[source] = tuple(sorted(options.items()))

    return ProbDictionary(entries=entries, oov_policy=oov_policy)


def load_dictionary(
    path: str | Path, oov_policy: OovPolicy = "copy", normalize: bool = False
) -> ProbDictionary:
    """Load a dictionary file of ``source<TAB>translation<TAB>probability`` lines.

    Args:
        path: Dictionary file location
        oov_policy: Policy for tokens missing from the table
        normalize: Rescale each entry's probabilities to sum to 1

    Returns:
        Validated dictionary

    Raises:
        IngestError: If the file cannot be read or a line is malformed
        DictionaryError: If an entry violates the probability invariants
    """
    name = str(path)
    triples: list[tuple[str, str, float]] = []
    try:
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 3:
                    raise IngestError("expected 3 tab-separated fields", name, line_no)
                try:
                    probability = float(parts[2])
                except ValueError:
                    raise IngestError(f"invalid probability '{parts[2]}'", name, line_no) from None
                triples.append((parts[0], parts[1], probability))
    except FileNotFoundError:
        raise IngestError("dictionary file not found", name) from None
    except PermissionError:
        raise IngestError("permission denied", name) from None

    return build_dictionary(triples, oov_policy=oov_policy, normalize=normalize)


def save_dictionary(dictionary: ProbDictionary, path: str | Path) -> None:
    """Write a dictionary in the tab-separated file format."""
    with open(path, "w", encoding="utf-8") as f:
        for source in sorted(dictionary.entries):
            for target, probability in dictionary.alternatives(source):
                f.write(f"{source}\t{target}\t{probability!r}\n")


@dataclass(frozen=True)
class DictionaryAdapter:
    """Word-by-word translator producing n-best lists with a beam.

    Hypothesis scores are sums of natural-log probabilities. Because every
    position contributes independently, keeping the best n_best prefixes at
    each step yields the exact n best complete hypotheses.
    """

    dictionary: ProbDictionary
    output_lang: str = "en"
    concurrent: bool = True

    def translate(
        self,
        sentence: Sentence,
        n_best: int,
        seed: int,  # noqa: ARG002
    ) -> list[TranslationHypothesis]:
        """Translate a sentence into up to n_best ranked hypotheses."""
        beam: list[tuple[float, tuple[str, ...]]] = [(0.0, ())]

        for token in sentence.tokens:
            options = self.dictionary.alternatives(token)
            if not options:
                if self.dictionary.oov_policy == "copy":
                    beam = [(score, tokens + (token,)) for score, tokens in beam]
                continue

            expanded = [
                (score + math.log(probability), tokens + (translation,))
                for score, tokens in beam
                for translation, probability in options
            ]
            expanded.sort(key=lambda item: (-item[0], item[1]))
            beam = expanded[:n_best]

        return [TranslationHypothesis(sentence.id, tokens, score) for score, tokens in beam]


@dataclass
class ExternalCommandAdapter:
    """Adapter delegating to an external translation command.

    The command reads one sentence per input line and writes, per input line,
    up to n_best tab-separated translations ranked best first. ``{n_best}`` and
    ``{seed}`` in the argument list are substituted before each call. The
    hypothesis at rank r (0-based) gets score -r.

    Attributes:
        command: Program and arguments
        output_lang: Language of the produced translations
        concurrent: Whether the command may run in parallel invocations
        timeout: Seconds before an invocation is abandoned
    """

    command: Sequence[str]
    output_lang: str = "en"
    concurrent: bool = False
    timeout: float | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def from_string(
        cls, command: str, output_lang: str = "en", timeout: float | None = None
    ) -> "ExternalCommandAdapter":
        """Build an adapter from a shell-style command string."""
        return cls(command=shlex.split(command), output_lang=output_lang, timeout=timeout)

    def _argv(self, n_best: int, seed: int) -> list[str]:
        return [arg.replace("{n_best}", str(n_best)).replace("{seed}", str(seed)) for arg in self.command]

    def translate_lines(
        self, sentences: Sequence[Sentence], n_best: int, seed: int
    ) -> dict[int, list[TranslationHypothesis]]:
        """Translate a batch of sentences with a single command invocation.

        Args:
            sentences: Sentences to translate
            n_best: Maximum hypotheses per sentence
            seed: Seed substituted into the command arguments

        Returns:
            Mapping from sentence id to ranked hypotheses

        Raises:
            TranslationError: If the command fails or its output is malformed
        """
        if not sentences:
            return {}

        first_id = sentences[0].id
        payload = "".join(" ".join(s.text.split()) + "\n" for s in sentences)
        try:
            completed = subprocess.run(
                self._argv(n_best, seed),
                input=payload,
                capture_output=True,
                text=True,
                encoding="utf-8",
                timeout=self.timeout,
                check=False,
            )
        except (OSError, subprocess.SubprocessError) as e:
            raise TranslationError(f"could not run translation command: {e}", first_id) from e

        if completed.returncode != 0:
            detail = completed.stderr.strip().splitlines()[-1:] or [""]
            raise TranslationError(
                f"translation command exited with {completed.returncode}: {detail[0]}", first_id
            )

        lines = completed.stdout.splitlines()
        if len(lines) != len(sentences):
            raise TranslationError(
                f"translation command returned {len(lines)} lines for {len(sentences)} sentences",
                first_id,
            )

        result: dict[int, list[TranslationHypothesis]] = {}
        for sentence, line in zip(sentences, lines, strict=True):
            outputs = line.split("\t")[:n_best] if line else [""]
            result[sentence.id] = [
                TranslationHypothesis(sentence.id, tokenize(text), float(-rank))
                for rank, text in enumerate(outputs)
            ]
        return result

    def translate(
        self, sentence: Sentence, n_best: int, seed: int
    ) -> list[TranslationHypothesis]:
        """Translate a single sentence."""
        with self._lock:
            return self.translate_lines([sentence], n_best, seed)[sentence.id]


def _checked(
    hypotheses: list[TranslationHypothesis], sentence: Sentence, n_best: int
) -> list[TranslationHypothesis]:
    """Enforce the adapter contract on raw adapter output."""
    if not hypotheses:
        raise TranslationError("adapter returned no hypotheses", sentence.id)
    if any(h.origin_id != sentence.id for h in hypotheses):
        raise TranslationError("adapter returned a hypothesis for another sentence", sentence.id)
    ranked = sorted(hypotheses, key=lambda h: -h.score)
    return ranked[:n_best]


def translate_sentence(
    adapter: TranslationAdapter, s: Sentence, n_best: int, seed: int
) -> list[TranslationHypothesis]:
    """Translate one sentence into a ranked n-best list.

    Args:
        adapter: Translation adapter
        s: Sentence to translate
        n_best: Maximum number of hypotheses, at least 1
        seed: Random seed handed to the adapter

    Returns:
        Hypotheses ranked by descending score, at most n_best of them

    Raises:
        ValueError: If n_best is smaller than 1
        TranslationError: If the adapter fails
    """
    if n_best < 1:
        raise ValueError(f"n_best must be at least 1, got {n_best}")
    try:
        hypotheses = adapter.translate(s, n_best, seed)
    except TranslationError:
        raise
    except Exception as e:
        raise TranslationError(f"adapter failed: {e}", s.id) from e
    return _checked(hypotheses, s, n_best)


def translate_corpus(
    adapter: TranslationAdapter,
    side: CorpusSide,
    n_best: int,
    seed: int,
    jobs: int = 1,
    progress: bool = False,
) -> dict[int, list[TranslationHypothesis]]:
    """Translate every sentence of a corpus side.

    External command adapters receive the whole side in one invocation;
    other adapters are called per sentence, in parallel when they allow it.

    Args:
        adapter: Translation adapter
        side: Corpus side to translate
        n_best: Maximum hypotheses per sentence
        seed: Random seed handed to the adapter
        jobs: Worker threads for concurrency-safe adapters
        progress: Show a progress bar

    Returns:
        Mapping from sentence id to its ranked hypotheses

    Raises:
        TranslationError: If translating any sentence fails
    """
    sentences = list(side)
    if not sentences:
        return {}

    if isinstance(adapter, ExternalCommandAdapter):
        raw = adapter.translate_lines(sentences, n_best, seed)
        return {s.id: _checked(raw[s.id], s, n_best) for s in sentences}

    def work(sentence: Sentence) -> list[TranslationHypothesis]:
        return translate_sentence(adapter, sentence, n_best, seed)

    bar = tqdm(total=len(sentences), desc=f"Translating {side.lang}", disable=not progress)
    results: dict[int, list[TranslationHypothesis]] = {}
    with bar:
        if jobs > 1 and adapter.concurrent:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for sentence, hypotheses in zip(sentences, pool.map(work, sentences), strict=True):
                    results[sentence.id] = hypotheses
                    bar.update(1)
        else:
            for sentence in sentences:
                results[sentence.id] = work(sentence)
                bar.update(1)

    logger.info("translated %d '%s' sentences into '%s'", len(results), side.lang, adapter.output_lang)
    return results
