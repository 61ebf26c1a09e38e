"""Descriptive corpus statistics grouped by document source."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Sequence

from patentqa.errors import DomainError
from patentqa.model import PatentDocument, Source
from patentqa.numerals import FIGURE_REF_RE


@dataclass(frozen=True)
class GroupStats:
    mean: float
    median: float
    sd: float


@dataclass(frozen=True)
class SourceStats:
    word_count: GroupStats
    claims_count: GroupStats
    figure_refs: GroupStats
    n: int


@dataclass(frozen=True)
class CorpusStats:
    groups: dict[Source, SourceStats]
    sd_mode: str  # "sample" | "population"

    def to_dict(self) -> dict:
        return {
            "sd_mode": self.sd_mode,
            "groups": {
                source.value: {
                    "n": stats.n,
                    "word_count": vars(stats.word_count),
                    "claims_count": vars(stats.claims_count),
                    "figure_refs": vars(stats.figure_refs),
                }
                for source, stats in self.groups.items()
            },
        }


def word_count(doc: PatentDocument) -> int:
    """Whitespace-delimited tokens over all section texts plus claim texts."""
    total = sum(len(s.raw_text.split()) for s in doc.sections)
    total += sum(len(c.text.split()) for c in doc.claims)
    return total


def figure_reference_count(doc: PatentDocument) -> int:
    """Distinct figure numbers cited across sections and claims."""
    numbers: set[str] = set()
    for section in doc.sections:
        numbers.update(m.group(1) for m in FIGURE_REF_RE.finditer(section.raw_text))
    for claim in doc.claims:
        numbers.update(m.group(1) for m in FIGURE_REF_RE.finditer(claim.text))
    return len(numbers)


def _group_stats(values: Sequence[float], sd_mode: str) -> GroupStats:
    if len(values) == 1:
        return GroupStats(mean=float(values[0]), median=float(values[0]), sd=0.0)
    sd = statistics.stdev(values) if sd_mode == "sample" else statistics.pstdev(values)
    return GroupStats(
        mean=statistics.fmean(values), median=float(statistics.median(values)), sd=sd
    )


def describe_corpus(docs: Sequence[PatentDocument], sd_mode: str = "sample") -> CorpusStats:
    """Per-source mean/median/sd of word, claim, and figure-reference counts."""
    if not docs:
        raise DomainError("cannot describe an empty corpus")
    if sd_mode not in ("sample", "population"):
        raise DomainError(f"sd_mode must be 'sample' or 'population', got {sd_mode!r}")

    by_source: dict[Source, list[PatentDocument]] = {}
    for doc in docs:
        by_source.setdefault(doc.source, []).append(doc)

    groups: dict[Source, SourceStats] = {}
    for source in sorted(by_source, key=lambda s: s.value):
        members = by_source[source]
        groups[source] = SourceStats(
            word_count=_group_stats([word_count(d) for d in members], sd_mode),
            claims_count=_group_stats([len(d.claims) for d in members], sd_mode),
            figure_refs=_group_stats([figure_reference_count(d) for d in members], sd_mode),
            n=len(members),
        )
    return CorpusStats(groups=groups, sd_mode=sd_mode)
