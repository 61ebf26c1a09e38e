"""Technical-coherence validation: four-tier per-sentence risk classification."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Optional

from patentqa.errors import ConfigurationError
from patentqa.findings import Finding, Location, Severity, make_finding
from patentqa.model import PatentDocument, SectionKind, Sentence
from patentqa.numerals import (
    MentionOccurrence,
    TerminologyMap,
    build_terminology_map,
    canonical_name,
    element_mentions,
    figure_citations,
)
from patentqa.profile import JurisdictionProfile
from patentqa.segmentation import split_templates
from patentqa.votes import VoteAggregation, aggregate_votes


class RiskLevel(str, Enum):
    SAFE = "safe"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


RISK_ORDER: tuple[RiskLevel, ...] = (
    RiskLevel.SAFE,
    RiskLevel.LOW,
    RiskLevel.MEDIUM,
    RiskLevel.HIGH,
)
_RISK_RANK = {lvl: i for i, lvl in enumerate(RISK_ORDER)}

RISK_TO_SEVERITY = {
    RiskLevel.LOW: Severity.LOW,
    RiskLevel.MEDIUM: Severity.MEDIUM,
    RiskLevel.HIGH: Severity.HIGH,
}


def risk_rank(level: RiskLevel) -> int:
    return _RISK_RANK[level]


@dataclass(frozen=True)
class RiskCriterion:
    criterion_id: str
    level: RiskLevel
    description: str
    rule: Optional[str] = None  # machine-checkable predicate id, when one exists


@dataclass(frozen=True)
class RiskCatalog:
    catalog_id: str
    version: str
    criteria: tuple[RiskCriterion, ...]

    def by_id(self, criterion_id: str) -> Optional[RiskCriterion]:
        for c in self.criteria:
            if c.criterion_id == criterion_id:
                return c
        return None

    def by_rule(self, rule: str) -> RiskCriterion:
        for c in self.criteria:
            if c.rule == rule:
                return c
        raise ConfigurationError(f"risk catalog has no criterion with rule {rule!r}")


@lru_cache(maxsize=1)
def load_risk_catalog() -> RiskCatalog:
    path = resources.files("patentqa").joinpath("assets/catalogs/risk_criteria.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    criteria = tuple(
        RiskCriterion(
            criterion_id=c["criterion_id"],
            level=RiskLevel(c["level"]),
            description=c["description"],
            rule=c.get("rule"),
        )
        for c in data["criteria"]
    )
    return RiskCatalog(catalog_id=data["catalog_id"], version=data["version"], criteria=criteria)


@dataclass(frozen=True)
class RiskVerdict:
    sentence_id: str
    level: RiskLevel
    criteria: tuple[str, ...]
    rationale: str

    def __post_init__(self):
        if self.level is RiskLevel.SAFE and self.criteria:
            raise ValueError("safe verdicts cannot match criteria")
        if self.level is not RiskLevel.SAFE and not self.criteria:
            raise ValueError("non-safe verdicts need at least one matched criterion")


@dataclass
class DocumentContext:
    """Immutable per-document context shared by all sentence assessments."""

    claims_text: str
    terminology: TerminologyMap
    deviant_sentence_ids: frozenset[str]
    has_figure_entries: bool
    profile: JurisdictionProfile
    catalog: RiskCatalog


SPACING_IRREGULARITY_RE = re.compile(r"  +|\s+[,.;:?!]")

_SUPPORT_SECTIONS = (SectionKind.INVENTION_CONTENT, SectionKind.DETAILED_EMBODIMENTS)


def build_context(
    doc: PatentDocument,
    profile: JurisdictionProfile,
    catalog: RiskCatalog | None = None,
    live_sentences: list[Sentence] | None = None,
) -> DocumentContext:
    catalog = catalog or load_risk_catalog()
    if live_sentences is None:
        live_sentences, _ = split_templates(doc.sentences(), profile.template_patterns)
    terminology = build_terminology_map(live_sentences, profile.canonical_terms)
    deviant_ids = frozenset(
        occ.sentence.sentence_id for occ, _kind, _canon in terminology.deviant_occurrences()
    )
    return DocumentContext(
        claims_text=" ".join(c.text.lower() for c in doc.claims),
        terminology=terminology,
        deviant_sentence_ids=deviant_ids,
        has_figure_entries=bool(doc.figure_manifest and doc.figure_manifest.entries),
        profile=profile,
        catalog=catalog,
    )


def _rule_matches(sentence: Sentence, context: DocumentContext) -> list[tuple[RiskCriterion, str]]:
    """Evaluate the machine-checkable criteria; returns (criterion, rationale) pairs."""
    catalog = context.catalog
    matches: list[tuple[RiskCriterion, str]] = []

    if sentence.sentence_id in context.deviant_sentence_ids:
        matches.append(
            (
                catalog.by_rule("label_contradiction"),
                "element naming contradicts the document's majority binding",
            )
        )

    if sentence.section_kind in _SUPPORT_SECTIONS:
        unsupported = []
        for mention in element_mentions(sentence.text):
            name = canonical_name(mention.name, context.profile.canonical_terms)
            if not re.search(rf"\b{re.escape(name)}\b", context.claims_text):
                unsupported.append(name)
        if unsupported:
            matches.append(
                (
                    catalog.by_rule("unsupported_element"),
                    f"element(s) {', '.join(sorted(set(unsupported)))} appear in no claim",
                )
            )

    if sentence.section_kind is SectionKind.TECHNICAL_FIELD:
        lowered = sentence.text.lower()
        for phrase in context.profile.vague_scope_phrases:
            if phrase in lowered:
                matches.append(
                    (
                        catalog.by_rule("vague_scope_phrase"),
                        f"open-ended scope wording {phrase!r}",
                    )
                )
                break

    if context.profile.wordlist:
        from patentqa.compliance import _wordlist_misses

        misses = _wordlist_misses(sentence.text, context.profile.wordlist)
        if misses:
            matches.append(
                (
                    catalog.by_rule("wordlist_miss"),
                    f"token {misses[0][0]!r} is not in the profile wordlist",
                )
            )

    if SPACING_IRREGULARITY_RE.search(sentence.text):
        matches.append((catalog.by_rule("spacing_irregularity"), "irregular spacing"))

    return matches


def _verdict_from_matches(
    sentence_id: str, matches: list[tuple[RiskCriterion, str]]
) -> RiskVerdict:
    if not matches:
        return RiskVerdict(sentence_id=sentence_id, level=RiskLevel.SAFE, criteria=(), rationale="")
    level = max((c.level for c, _ in matches), key=risk_rank)
    ordered = sorted(matches, key=lambda m: (-risk_rank(m[0].level), m[0].criterion_id))
    return RiskVerdict(
        sentence_id=sentence_id,
        level=level,
        criteria=tuple(c.criterion_id for c, _ in ordered),
        rationale="; ".join(why for _, why in ordered),
    )


def assess_sentence_risk(
    sentence: Sentence,
    context: DocumentContext,
    backend=None,
    votes: VoteAggregation = VoteAggregation(k=1),
) -> RiskVerdict:
    """Classify one sentence; inference backends are polled k times and merged."""
    if backend is not None and getattr(backend, "kind", "rule_based") != "rule_based":
        passes = [backend.risk_verdict(sentence, context) for _ in range(votes.k)]
        return aggregate_votes(passes, votes, lambda v: v.level, RISK_ORDER)
    # Rule backends are deterministic, so repeated passes are pointless: k is 1.
    return _verdict_from_matches(sentence.sentence_id, _rule_matches(sentence, context))


@dataclass
class CoherenceResult:
    findings: list[Finding] = field(default_factory=list)
    verdicts: dict[str, RiskVerdict] = field(default_factory=dict)
    safe_tally: int = 0
    safe_by_section: dict[str, int] = field(default_factory=dict)
    errors: list[tuple[str, str]] = field(default_factory=list)


def run_coherence(
    doc: PatentDocument,
    profile: JurisdictionProfile,
    backend=None,
    votes: VoteAggregation = VoteAggregation(k=1),
    catalog: RiskCatalog | None = None,
) -> CoherenceResult:
    """Assess every non-template sentence plus the document-scope figure rule."""
    catalog = catalog or load_risk_catalog()
    live, _ = split_templates(doc.sentences(), profile.template_patterns)
    context = build_context(doc, profile, catalog, live_sentences=live)
    result = CoherenceResult()

    for sentence in live:
        try:
            verdict = assess_sentence_risk(sentence, context, backend, votes)
        except Exception as e:
            result.errors.append((sentence.sentence_id, f"{type(e).__name__}: {e}"))
            continue
        result.verdicts[sentence.sentence_id] = verdict
        if verdict.level is RiskLevel.SAFE:
            result.safe_tally += 1
            key = sentence.section_kind.value
            result.safe_by_section[key] = result.safe_by_section.get(key, 0) + 1
        else:
            primary = verdict.criteria[0]
            result.findings.append(
                make_finding(
                    primary,
                    Location(
                        scope="sentence",
                        section_kind=sentence.section_kind,
                        section_label=sentence.section_label,
                        sentence_id=sentence.sentence_id,
                        span=_evidence_span(sentence, context, primary),
                    ),
                    severity=RISK_TO_SEVERITY[verdict.level],
                    template_key=f"coherence_{verdict.level.value}",
                    detail=verdict.rationale,
                )
            )

    # Figures are a document property: text that leans on figures while the
    # document declares none is flagged once, at document scope.
    if not context.has_figure_entries:
        cited = [
            num for s in live for num, _span in figure_citations(s.text)
        ]
        if cited:
            criterion = catalog.by_rule("missing_figures")
            result.findings.append(
                make_finding(
                    criterion.criterion_id,
                    Location(scope="document"),
                    severity=RISK_TO_SEVERITY[criterion.level],
                    template_key=f"coherence_{criterion.level.value}",
                    detail=(
                        f"the text cites figure(s) {', '.join(sorted(set(cited), key=int))} "
                        "but the document declares no figure content"
                    ),
                )
            )

    from patentqa.findings import sort_findings

    result.findings = sort_findings(result.findings)
    return result


def _evidence_span(
    sentence: Sentence, context: DocumentContext, criterion_id: str
) -> Optional[tuple[int, int]]:
    """Section-relative span of the primary evidence, when one is locatable."""
    offset = sentence.char_span[0]
    criterion = context.catalog.by_id(criterion_id)
    if criterion is None or criterion.rule is None:
        return None
    if criterion.rule == "label_contradiction":
        for occ, _kind, _canon in context.terminology.deviant_occurrences():
            if occ.sentence.sentence_id == sentence.sentence_id:
                return occ.section_span
    elif criterion.rule == "unsupported_element":
        for mention in element_mentions(sentence.text):
            name = canonical_name(mention.name, context.profile.canonical_terms)
            if not re.search(rf"\b{re.escape(name)}\b", context.claims_text):
                return (offset + mention.span[0], offset + mention.span[1])
    elif criterion.rule == "vague_scope_phrase":
        lowered = sentence.text.lower()
        for phrase in context.profile.vague_scope_phrases:
            pos = lowered.find(phrase)
            if pos >= 0:
                return (offset + pos, offset + pos + len(phrase))
    elif criterion.rule == "wordlist_miss":
        from patentqa.compliance import _wordlist_misses

        misses = _wordlist_misses(sentence.text, context.profile.wordlist)
        if misses:
            return (offset + misses[0][1], offset + misses[0][2])
    elif criterion.rule == "spacing_irregularity":
        m = SPACING_IRREGULARITY_RE.search(sentence.text)
        if m:
            return (offset + m.start(), offset + m.end())
    return None
