"""Shared test fixtures and utilities for pivotex tests."""

from datetime import date

from pivotex.corpus import (
    ComparableCorpus,
    CorpusSide,
    PivotSentence,
    RawDocument,
    Sentence,
    build_side,
    parse_day,
    tokenize,
)


def make_sentence(sentence_id: int, text: str, day: str = "2024-01-01", lang: str = "en") -> Sentence:
    """Build a standalone sentence for adapter and metric tests."""
    return Sentence(
        id=sentence_id,
        doc_id="d",
        lang=lang,
        date=parse_day(day),
        text=text,
        tokens=tokenize(text),
    )


def make_pivot(sentence_id: int, text: str, day: str = "2024-01-01") -> PivotSentence:
    """Build a pivot sentence from whitespace-separated text."""
    return PivotSentence(id=sentence_id, date=parse_day(day), tokens=tokenize(text))


def make_side(lang: str, docs: list[tuple[str, list[str]]], first_id: int = 0) -> CorpusSide:
    """Build a corpus side from (date, sentences) pairs, one document each.

    Args:
        lang: Language tag
        docs: Documents as (YYYY-MM-DD, sentence texts)
        first_id: Id of the first sentence

    Returns:
        Corpus side with consecutive sentence ids
    """
    records = [RawDocument(date=parse_day(day), sentences=tuple(texts)) for day, texts in docs]
    return build_side(lang, records, first_id)


def make_corpus(
    source_docs: list[tuple[str, list[str]]], target_docs: list[tuple[str, list[str]]]
) -> ComparableCorpus:
    """Build a comparable corpus whose sides are already written in the pivot language."""
    return ComparableCorpus(make_side("src", source_docs), make_side("tgt", target_docs))


def day(value: str) -> date:
    return parse_day(value)
