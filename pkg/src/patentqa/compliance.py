"""Regulatory-compliance detection: per-sentence binary verdicts plus document checks."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from patentqa.findings import Finding, Location, make_finding
from patentqa.model import PatentDocument, SectionKind, Sentence
from patentqa.numerals import (
    FIGURE_REF_RE,
    build_terminology_map,
    figure_number_from_label,
    tokenize_with_spans,
)
from patentqa.profile import JurisdictionProfile
from patentqa.segmentation import split_templates


class ComplianceCategory(str, Enum):
    PROHIBITED_COMMERCIAL_LANGUAGE = "prohibited_commercial_language"
    INCONSISTENT_TERMINOLOGY = "inconsistent_terminology"
    MISSING_MANDATORY_SECTION = "missing_mandatory_section"
    IMPROPER_TITLE_ABSTRACT_FORMAT = "improper_title_abstract_format"
    ORTHOGRAPHIC_ERROR = "orthographic_error"
    INSUFFICIENT_FIGURE_DESCRIPTION = "insufficient_figure_description"


@dataclass(frozen=True)
class ComplianceVerdict:
    """Binary verdict for one sentence (or the document when sentence_id is None)."""

    sentence_id: Optional[str]
    compliant: bool
    category: Optional[ComplianceCategory] = None
    explanation: str = ""
    evidence_span: Optional[tuple[int, int]] = None  # relative to the sentence text

    def __post_init__(self):
        if self.compliant and self.category is not None:
            raise ValueError("compliant verdicts cannot carry a category")
        if not self.compliant and not self.explanation:
            raise ValueError("non-compliant verdicts need an explanation")


DOUBLED_PUNCTUATION_RE = re.compile(r"([.,;:!?])\1+")


def _wordlist_misses(text: str, wordlist: frozenset[str]) -> list[tuple[str, int, int]]:
    misses = []
    for token, start, end in tokenize_with_spans(text):
        if not token[0].isalpha() or len(token) < 2:
            continue
        if any(ch.isdigit() for ch in token):
            continue
        if token.lower() not in wordlist:
            misses.append((token, start, end))
    return misses


def check_sentence(
    sentence: Sentence, profile: JurisdictionProfile, backend=None
) -> ComplianceVerdict:
    """Rule path: prohibited-phrase lexicon (longest match) then orthographic rules."""
    if backend is not None and getattr(backend, "kind", "rule_based") != "rule_based":
        return backend.compliance_verdict(sentence, profile)

    if profile.lexicon_regex is not None:
        m = profile.lexicon_regex.search(sentence.text)
        if m:
            phrase = m.group(0)
            entry = profile.lexicon_entry(phrase)
            category = ComplianceCategory(
                entry.category if entry else "prohibited_commercial_language"
            )
            explanation = (
                entry.explanation
                if entry and entry.explanation
                else f"prohibited phrase {phrase!r} is subjective commercial language"
            )
            return ComplianceVerdict(
                sentence_id=sentence.sentence_id,
                compliant=False,
                category=category,
                explanation=explanation,
                evidence_span=(m.start(), m.end()),
            )

    if profile.wordlist:
        misses = _wordlist_misses(sentence.text, profile.wordlist)
        if misses:
            token, start, end = misses[0]
            return ComplianceVerdict(
                sentence_id=sentence.sentence_id,
                compliant=False,
                category=ComplianceCategory.ORTHOGRAPHIC_ERROR,
                explanation=f"token {token!r} is not in the profile wordlist",
                evidence_span=(start, end),
            )

    m = DOUBLED_PUNCTUATION_RE.search(sentence.text)
    if m:
        return ComplianceVerdict(
            sentence_id=sentence.sentence_id,
            compliant=False,
            category=ComplianceCategory.ORTHOGRAPHIC_ERROR,
            explanation=f"doubled punctuation {m.group(0)!r}",
            evidence_span=(m.start(), m.end()),
        )

    return ComplianceVerdict(sentence_id=sentence.sentence_id, compliant=True)


def check_document_structure(doc: PatentDocument, profile: JurisdictionProfile) -> list[Finding]:
    findings: list[Finding] = []
    present = {s.kind for s in doc.sections}
    for kind in profile.mandatory_sections:
        if kind not in present:
            findings.append(
                make_finding(
                    ComplianceCategory.MISSING_MANDATORY_SECTION.value,
                    Location(scope="document", section_kind=kind),
                    section=kind.value,
                )
            )

    title = doc.title.strip()
    rules = profile.title_rules
    if len(title) > rules.max_chars:
        findings.append(
            _format_finding("title", f"title exceeds {rules.max_chars} characters ({len(title)})")
        )
    lowered_title = title.lower()
    for word in rules.forbidden_leading:
        if lowered_title.startswith(word.lower()):
            findings.append(
                _format_finding("title", f"title must not begin with {word!r}")
            )
            break

    abstract = doc.abstract.strip()
    arules = profile.abstract_rules
    word_count = len(abstract.split())
    if word_count < arules.min_words:
        findings.append(
            _format_finding(
                "abstract", f"abstract has {word_count} words, fewer than {arules.min_words}"
            )
        )
    elif word_count > arules.max_words:
        findings.append(
            _format_finding(
                "abstract", f"abstract has {word_count} words, more than {arules.max_words}"
            )
        )
    lowered_abstract = abstract.lower()
    for phrase in arules.forbidden_leading:
        if lowered_abstract.startswith(phrase.lower()):
            findings.append(
                _format_finding("abstract", f"abstract must not begin with {phrase!r}")
            )
            break

    return findings


def _format_finding(doc_field: str, detail: str) -> Finding:
    return make_finding(
        ComplianceCategory.IMPROPER_TITLE_ABSTRACT_FORMAT.value,
        Location(scope="document", doc_field=doc_field),
        field=doc_field,
        detail=detail,
    )


def check_terminology_consistency(
    doc: PatentDocument, profile: JurisdictionProfile
) -> list[Finding]:
    """Flag element mentions whose name/numeral binding loses against the document majority."""
    live = _live_sentences(doc, profile)
    tmap = build_terminology_map(live, profile.canonical_terms)
    findings: list[Finding] = []
    for occ, conflict_kind, canonical in tmap.deviant_occurrences():
        sentence = occ.sentence
        mention = occ.mention
        if conflict_kind == "numeral":
            deviant, numeral = mention.name, mention.numeral
            other = tmap.by_numeral[mention.numeral][canonical][0]
        else:
            deviant, numeral = mention.name, mention.numeral
            other = tmap.by_name[mention.name][canonical][0]
        other_location = f"{other.sentence.sentence_id} span {other.section_span}"
        findings.append(
            make_finding(
                ComplianceCategory.INCONSISTENT_TERMINOLOGY.value,
                Location(
                    scope="sentence",
                    section_kind=sentence.section_kind,
                    section_label=sentence.section_label,
                    sentence_id=sentence.sentence_id,
                    span=occ.section_span,
                ),
                numeral=numeral,
                deviant=deviant,
                canonical=canonical,
                other_location=other_location,
            )
        )
    return findings


def check_figure_description_sufficiency(
    doc: PatentDocument, profile: JurisdictionProfile
) -> list[Finding]:
    if doc.figure_manifest is None or not doc.figure_manifest.entries:
        return []
    drawings = doc.section(SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS)
    findings: list[Finding] = []
    for entry in doc.figure_manifest.entries:
        number = figure_number_from_label(entry.figure_label)
        described = 0
        if drawings is not None and number is not None:
            for sentence in drawings.sentences:
                cited = {num for num, _span in _citations(sentence.text)}
                if number in cited:
                    described += 1
        if described < profile.figure_description_min_sentences:
            findings.append(
                make_finding(
                    ComplianceCategory.INSUFFICIENT_FIGURE_DESCRIPTION.value,
                    Location(
                        scope="figure",
                        section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
                        figure_label=entry.figure_label,
                    ),
                )
            )
    return findings


def _citations(text: str):
    return [(m.group(1), (m.start(), m.end())) for m in FIGURE_REF_RE.finditer(text)]


def _live_sentences(doc: PatentDocument, profile: JurisdictionProfile) -> list[Sentence]:
    live, _ = split_templates(doc.sentences(), profile.template_patterns)
    return live


@dataclass
class ComplianceResult:
    findings: list[Finding] = field(default_factory=list)
    verdicts: dict[str, ComplianceVerdict] = field(default_factory=dict)
    errors: list[tuple[str, str]] = field(default_factory=list)  # (sentence_id, message)


def run_compliance(
    doc: PatentDocument, profile: JurisdictionProfile, backend=None
) -> ComplianceResult:
    """All compliance checks; findings in deterministic section/span order."""
    result = ComplianceResult()
    for sentence in _live_sentences(doc, profile):
        try:
            verdict = check_sentence(sentence, profile, backend)
        except Exception as e:  # backend failure: recorded, never a verdict
            result.errors.append((sentence.sentence_id, f"{type(e).__name__}: {e}"))
            continue
        result.verdicts[sentence.sentence_id] = verdict
        if not verdict.compliant:
            offset = sentence.char_span[0]
            span = None
            if verdict.evidence_span is not None:
                span = (offset + verdict.evidence_span[0], offset + verdict.evidence_span[1])
            evidence = ""
            if verdict.evidence_span is not None:
                evidence = sentence.text[verdict.evidence_span[0] : verdict.evidence_span[1]]
            result.findings.append(
                make_finding(
                    verdict.category.value,
                    Location(
                        scope="sentence",
                        section_kind=sentence.section_kind,
                        section_label=sentence.section_label,
                        sentence_id=sentence.sentence_id,
                        span=span,
                    ),
                    evidence=evidence,
                    detail=verdict.explanation,
                )
            )

    result.findings.extend(check_document_structure(doc, profile))
    result.findings.extend(check_terminology_consistency(doc, profile))
    result.findings.extend(check_figure_description_sufficiency(doc, profile))

    from patentqa.findings import sort_findings

    result.findings = sort_findings(result.findings)
    return result
