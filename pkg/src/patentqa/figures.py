"""Figure-reference consistency: inventory, per-pair verification, cross-figure pass."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from patentqa.errors import VerificationUnavailableError
from patentqa.findings import Finding, Location, make_finding
from patentqa.model import PatentDocument, SectionKind, Sentence
from patentqa.numerals import (
    canonical_name,
    element_mentions,
    figure_citations,
    figure_label,
    figure_number_from_label,
)
from patentqa.profile import JurisdictionProfile
from patentqa.segmentation import split_templates

# Pairs with more expected numerals than this are tagged complex in the
# coverage report; dense callouts are where verification gets unreliable.
DENSE_NUMERAL_THRESHOLD = 15


@dataclass(frozen=True)
class InventoryEntry:
    numeral: str
    names: tuple[str, ...]
    mentions: tuple[tuple[str, tuple[int, int]], ...]  # (sentence_id, section span)
    figure_numbers: tuple[str, ...]  # figures this numeral is textually tied to


@dataclass
class NumeralInventory:
    entries: dict[str, InventoryEntry] = field(default_factory=dict)

    def names_for(self, numeral: str) -> tuple[str, ...]:
        entry = self.entries.get(numeral)
        return entry.names if entry else ()

    def figures_for(self, numeral: str) -> tuple[str, ...]:
        entry = self.entries.get(numeral)
        return entry.figure_numbers if entry else ()


def build_numeral_inventory(
    doc: PatentDocument, profile: JurisdictionProfile | None = None
) -> NumeralInventory:
    """Scan every section for element mentions and their figure associations."""
    canonical_terms = profile.canonical_terms if profile else {}
    sentences: list[Sentence]
    if profile is not None:
        sentences, _ = split_templates(doc.sentences(), profile.template_patterns)
    else:
        sentences = list(doc.sentences())

    names: dict[str, list[str]] = {}
    mentions: dict[str, list[tuple[str, tuple[int, int]]]] = {}
    figure_numbers: dict[str, list[str]] = {}
    for sentence in sentences:
        offset = sentence.char_span[0]
        cited = [num for num, _span in figure_citations(sentence.text)]
        for mention in element_mentions(sentence.text):
            name = canonical_name(mention.name, canonical_terms)
            numeral = mention.numeral
            names.setdefault(numeral, [])
            if name not in names[numeral]:
                names[numeral].append(name)
            mentions.setdefault(numeral, []).append(
                (
                    sentence.sentence_id,
                    (offset + mention.span[0], offset + mention.span[1]),
                )
            )
            figure_numbers.setdefault(numeral, [])
            for num in cited:
                if num not in figure_numbers[numeral]:
                    figure_numbers[numeral].append(num)

    inventory = NumeralInventory()
    for numeral in sorted(names, key=lambda n: (len(n), n)):
        inventory.entries[numeral] = InventoryEntry(
            numeral=numeral,
            names=tuple(sorted(names[numeral])),
            mentions=tuple(mentions[numeral]),
            figure_numbers=tuple(sorted(figure_numbers[numeral], key=lambda x: (len(x), x))),
        )
    return inventory


class FigureDefectKind(str, Enum):
    MISSING_NUMERAL_IN_FIGURE = "missing_numeral_in_figure"
    UNREFERENCED_NUMERAL_IN_FIGURE = "unreferenced_numeral_in_figure"
    MISMATCHED_DESCRIPTION = "mismatched_description"
    NONEXISTENT_FIGURE_REFERENCE = "nonexistent_figure_reference"


@dataclass(frozen=True)
class PairDefect:
    kind: FigureDefectKind
    numeral: Optional[str] = None
    missing_label: Optional[str] = None  # for nonexistent references
    sentence_id: Optional[str] = None
    span: Optional[tuple[int, int]] = None
    depicted_name: Optional[str] = None
    textual_name: Optional[str] = None


@dataclass(frozen=True)
class FigurePair:
    figure_label: str
    figure_number: Optional[str]
    description_sentence_ids: tuple[str, ...]
    expected: tuple[str, ...]
    observed: Optional[tuple[str, ...]]  # None when unresolvable
    depicted_elements: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class PairVerdict:
    figure_label: str
    consistent: bool
    defects: tuple[PairDefect, ...]
    rationale: str

    def __post_init__(self):
        if self.consistent != (not self.defects):
            raise ValueError("pair is consistent exactly when it has no defects")


def _numeral_key(numeral: str):
    return (len(numeral), numeral)


def build_figure_pairs(
    doc: PatentDocument,
    inventory: NumeralInventory,
    profile: JurisdictionProfile | None = None,
    observation_backend=None,
) -> list[FigurePair]:
    """One pair per declared figure; without a manifest, pairs come from citations."""
    drawings = doc.section(SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS)
    description_sentences: dict[str, list[Sentence]] = {}
    if drawings is not None:
        sentences = drawings.sentences
        if profile is not None:
            sentences, _ = split_templates(sentences, profile.template_patterns)
        for sentence in sentences:
            for number, _span in figure_citations(sentence.text):
                description_sentences.setdefault(number, []).append(sentence)

    pairs: list[FigurePair] = []
    manifest = doc.figure_manifest
    if manifest is not None and manifest.entries:
        for entry in manifest.entries:
            number = figure_number_from_label(entry.figure_label)
            desc = description_sentences.get(number, []) if number is not None else []
            expected = _expected_numerals(number, desc, inventory)
            observed: Optional[tuple[str, ...]] = tuple(
                sorted(entry.visible_numerals, key=_numeral_key)
            )
            if observed == () and entry.image_path and observation_backend is not None:
                observed = tuple(
                    sorted(observation_backend.figure_observation(entry), key=_numeral_key)
                )
            pairs.append(
                FigurePair(
                    figure_label=entry.figure_label,
                    figure_number=number,
                    description_sentence_ids=tuple(s.sentence_id for s in desc),
                    expected=expected,
                    observed=observed,
                    depicted_elements=entry.depicted_elements or (),
                )
            )
    else:
        for number in sorted(description_sentences, key=lambda x: (len(x), x)):
            desc = description_sentences[number]
            pairs.append(
                FigurePair(
                    figure_label=figure_label(number),
                    figure_number=number,
                    description_sentence_ids=tuple(s.sentence_id for s in desc),
                    expected=_expected_numerals(number, desc, inventory),
                    observed=None,
                )
            )
    return pairs


def _expected_numerals(
    number: Optional[str], desc_sentences: list[Sentence], inventory: NumeralInventory
) -> tuple[str, ...]:
    expected: set[str] = set()
    for sentence in desc_sentences:
        for mention in element_mentions(sentence.text):
            expected.add(mention.numeral)
    if number is not None:
        for numeral, entry in inventory.entries.items():
            if number in entry.figure_numbers:
                expected.add(numeral)
    return tuple(sorted(expected, key=_numeral_key))


def verify_figure_pair(
    pair: FigurePair,
    inventory: NumeralInventory,
    known_figure_numbers: frozenset[str],
    description_texts: dict[str, Sentence] | None = None,
) -> PairVerdict:
    """Tasks run per pair: set difference both ways, phantom citations, name conflicts."""
    if pair.observed is None:
        raise VerificationUnavailableError(
            f"{pair.figure_label}: no manifest numerals and no observation backend"
        )

    defects: list[PairDefect] = []
    expected = set(pair.expected)
    observed = set(pair.observed)

    for numeral in sorted(expected - observed, key=_numeral_key):
        defects.append(PairDefect(kind=FigureDefectKind.MISSING_NUMERAL_IN_FIGURE, numeral=numeral))
    for numeral in sorted(observed - expected, key=_numeral_key):
        defects.append(
            PairDefect(kind=FigureDefectKind.UNREFERENCED_NUMERAL_IN_FIGURE, numeral=numeral)
        )

    if description_texts:
        for sentence_id in pair.description_sentence_ids:
            sentence = description_texts.get(sentence_id)
            if sentence is None:
                continue
            offset = sentence.char_span[0]
            seen: set[str] = set()
            for number, span in figure_citations(sentence.text):
                if number not in known_figure_numbers and number not in seen:
                    seen.add(number)
                    defects.append(
                        PairDefect(
                            kind=FigureDefectKind.NONEXISTENT_FIGURE_REFERENCE,
                            missing_label=figure_label(number),
                            sentence_id=sentence_id,
                            span=(offset + span[0], offset + span[1]),
                        )
                    )

    for numeral, depicted_name in pair.depicted_elements:
        textual_names = inventory.names_for(numeral)
        if textual_names and depicted_name.lower() not in textual_names:
            defects.append(
                PairDefect(
                    kind=FigureDefectKind.MISMATCHED_DESCRIPTION,
                    numeral=numeral,
                    depicted_name=depicted_name,
                    textual_name=textual_names[0],
                )
            )

    defects_sorted = tuple(
        sorted(
            defects,
            key=lambda d: (d.kind.value, _numeral_key(d.numeral or ""), d.missing_label or ""),
        )
    )
    rationale = (
        "all checks passed"
        if not defects_sorted
        else "; ".join(_defect_text(d) for d in defects_sorted)
    )
    return PairVerdict(
        figure_label=pair.figure_label,
        consistent=not defects_sorted,
        defects=defects_sorted,
        rationale=rationale,
    )


def _defect_text(d: PairDefect) -> str:
    if d.kind is FigureDefectKind.MISSING_NUMERAL_IN_FIGURE:
        return f"numeral {d.numeral} referenced in text but absent from the figure"
    if d.kind is FigureDefectKind.UNREFERENCED_NUMERAL_IN_FIGURE:
        return f"numeral {d.numeral} shown in the figure but never described"
    if d.kind is FigureDefectKind.MISMATCHED_DESCRIPTION:
        return (
            f"numeral {d.numeral} depicted as {d.depicted_name!r} "
            f"but described as {d.textual_name!r}"
        )
    return f"text cites {d.missing_label}, which is not a declared figure"


def cross_figure_validation(
    verdicts: list[PairVerdict],
    inventory: NumeralInventory,
    observed_by_number: dict[str, frozenset[str]],
) -> list[PairVerdict]:
    """Withdraw missing-numeral defects that another figure legitimately accounts for.

    A numeral "missing" from figure F is withdrawn when the text also ties it
    to figure G and G's observed numerals contain it. Never adds defects.
    """
    validated: list[PairVerdict] = []
    for verdict in verdicts:
        number = figure_number_from_label(verdict.figure_label)
        kept: list[PairDefect] = []
        withdrawn: list[str] = []
        for defect in verdict.defects:
            if defect.kind is FigureDefectKind.MISSING_NUMERAL_IN_FIGURE:
                homes = [
                    g
                    for g in inventory.figures_for(defect.numeral)
                    if g != number and defect.numeral in observed_by_number.get(g, frozenset())
                ]
                if homes:
                    withdrawn.append(
                        f"numeral {defect.numeral} withdrawn: shown in {figure_label(homes[0])} "
                        "per the text's own assignment"
                    )
                    continue
            kept.append(defect)
        if len(kept) == len(verdict.defects):
            validated.append(verdict)
        else:
            rationale = "; ".join(
                [_defect_text(d) for d in kept] + withdrawn
            ) or "all checks passed"
            validated.append(
                replace(
                    verdict,
                    consistent=not kept,
                    defects=tuple(kept),
                    rationale=rationale,
                )
            )
    return validated


@dataclass
class FigureCoverage:
    unverified: list[str] = field(default_factory=list)  # pairs with no observed set
    vacuous: list[str] = field(default_factory=list)  # figures with zero text references
    complex: list[str] = field(default_factory=list)  # dense numbering (> threshold)

    def to_dict(self) -> dict:
        return {
            "unverified": list(self.unverified),
            "vacuous": list(self.vacuous),
            "complex": list(self.complex),
        }


@dataclass
class FigureResult:
    findings: list[Finding] = field(default_factory=list)
    verdicts: list[PairVerdict] = field(default_factory=list)
    coverage: FigureCoverage = field(default_factory=FigureCoverage)
    pair_count: int = 0
    errors: list[tuple[str, str]] = field(default_factory=list)


def run_figure_check(
    doc: PatentDocument, profile: JurisdictionProfile, observation_backend=None
) -> FigureResult:
    """Inventory, per-pair verification, then the cross-figure pass over all pairs."""
    inventory = build_numeral_inventory(doc, profile)
    pairs = build_figure_pairs(doc, inventory, profile, observation_backend)
    result = FigureResult(pair_count=len(pairs))

    known_numbers = frozenset(
        p.figure_number for p in pairs if p.figure_number is not None
    ) if doc.figure_manifest and doc.figure_manifest.entries else frozenset()

    sentence_index = {s.sentence_id: s for s in doc.sentences()}
    verdicts: list[PairVerdict] = []
    verified_pairs: list[FigurePair] = []
    for pair in pairs:
        if len(pair.expected) > DENSE_NUMERAL_THRESHOLD:
            result.coverage.complex.append(pair.figure_label)
        if not pair.description_sentence_ids and not pair.expected:
            # Zero text references: consistent by vacuity, surfaced in coverage.
            result.coverage.vacuous.append(pair.figure_label)
            if pair.observed is not None:
                verdicts.append(
                    PairVerdict(
                        figure_label=pair.figure_label,
                        consistent=True,
                        defects=(),
                        rationale="no text references; consistent by vacuity",
                    )
                )
                verified_pairs.append(pair)
            else:
                result.coverage.unverified.append(pair.figure_label)
            continue
        try:
            verdict = verify_figure_pair(pair, inventory, known_numbers, sentence_index)
        except VerificationUnavailableError:
            result.coverage.unverified.append(pair.figure_label)
            continue
        verdicts.append(verdict)
        verified_pairs.append(pair)

    observed_by_number = {
        p.figure_number: frozenset(p.observed or ())
        for p in verified_pairs
        if p.figure_number is not None
    }
    result.verdicts = cross_figure_validation(verdicts, inventory, observed_by_number)

    for verdict in result.verdicts:
        for defect in verdict.defects:
            result.findings.append(_defect_finding(verdict.figure_label, defect, inventory))

    from patentqa.findings import sort_findings

    result.findings = sort_findings(result.findings)
    return result


def _defect_finding(label: str, defect: PairDefect, inventory: NumeralInventory) -> Finding:
    # Figure findings are attributed to the drawings-description chapter for
    # section statistics, whichever sentence produced the evidence.
    location = Location(
        scope="figure",
        section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
        figure_label=label,
        sentence_id=defect.sentence_id,
        span=defect.span,
    )
    if defect.kind is FigureDefectKind.MISMATCHED_DESCRIPTION:
        return make_finding(
            defect.kind.value,
            location,
            numeral=defect.numeral,
            depicted=defect.depicted_name,
            textual=defect.textual_name,
        )
    if defect.kind is FigureDefectKind.NONEXISTENT_FIGURE_REFERENCE:
        return make_finding(defect.kind.value, location, missing_label=defect.missing_label)
    return make_finding(defect.kind.value, location, numeral=defect.numeral)
