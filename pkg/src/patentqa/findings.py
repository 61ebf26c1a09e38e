"""Unified findings: one record per detected defect, across all three detectors."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Optional

from patentqa.errors import ConfigurationError
from patentqa.model import SECTION_ORDER, SectionKind


class Module(str, Enum):
    COMPLIANCE = "compliance"
    COHERENCE = "coherence"
    FIGURE_CONSISTENCY = "figure_consistency"


class Severity(str, Enum):
    INFO = "info"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


SEVERITY_ORDER: tuple[Severity, ...] = (
    Severity.INFO,
    Severity.LOW,
    Severity.MEDIUM,
    Severity.HIGH,
)
_SEVERITY_RANK = {s: i for i, s in enumerate(SEVERITY_ORDER)}


def severity_rank(severity: Severity) -> int:
    return _SEVERITY_RANK[severity]


@dataclass(frozen=True)
class Location:
    """Where a finding lives; spans are relative to the section raw_text."""

    scope: str  # "document" | "section" | "sentence" | "figure"
    section_kind: Optional[SectionKind] = None
    section_label: Optional[str] = None
    sentence_id: Optional[str] = None
    figure_label: Optional[str] = None
    span: Optional[tuple[int, int]] = None
    doc_field: Optional[str] = None  # "title" | "abstract" for front-matter findings

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "section_kind": self.section_kind.value if self.section_kind else None,
            "section_label": self.section_label,
            "sentence_id": self.sentence_id,
            "figure_label": self.figure_label,
            "span": list(self.span) if self.span else None,
            "doc_field": self.doc_field,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Location":
        return cls(
            scope=data["scope"],
            section_kind=SectionKind(data["section_kind"]) if data.get("section_kind") else None,
            section_label=data.get("section_label"),
            sentence_id=data.get("sentence_id"),
            figure_label=data.get("figure_label"),
            span=tuple(data["span"]) if data.get("span") else None,
            doc_field=data.get("doc_field"),
        )


@dataclass(frozen=True)
class Finding:
    finding_id: str
    module: Module
    category: str
    severity: Severity
    location: Location
    explanation: str
    recommendation: str
    root_cause: str

    def dedup_key(self) -> tuple:
        return (self.module.value, self.category, self.location)

    def to_dict(self) -> dict:
        return {
            "finding_id": self.finding_id,
            "module": self.module.value,
            "category": self.category,
            "severity": self.severity.value,
            "location": self.location.to_dict(),
            "explanation": self.explanation,
            "recommendation": self.recommendation,
            "root_cause": self.root_cause,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Finding":
        return cls(
            finding_id=data["finding_id"],
            module=Module(data["module"]),
            category=data["category"],
            severity=Severity(data["severity"]),
            location=Location.from_dict(data["location"]),
            explanation=data["explanation"],
            recommendation=data["recommendation"],
            root_cause=data["root_cause"],
        )


class _SafeSubs(dict):
    def __missing__(self, key):  # leave unknown placeholders visible rather than raising
        return f"<{key}>"


@dataclass(frozen=True)
class CategorySpec:
    category: str
    module: Module
    severity: Severity
    explanation: str
    recommendation: str
    root_cause: str


@lru_cache(maxsize=1)
def category_catalog() -> dict[str, CategorySpec]:
    """Load the shipped category -> severity/template table, validating completeness."""
    path = resources.files("patentqa").joinpath("assets/catalogs/finding_categories.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    catalog: dict[str, CategorySpec] = {}
    for category, raw in data["categories"].items():
        for key in ("module", "severity", "explanation", "recommendation", "root_cause"):
            if key not in raw:
                raise ConfigurationError(f"finding category {category!r} is missing {key!r}")
        catalog[category] = CategorySpec(
            category=category,
            module=Module(raw["module"]),
            severity=Severity(raw["severity"]),
            explanation=raw["explanation"],
            recommendation=raw["recommendation"],
            root_cause=raw["root_cause"],
        )
    return catalog


def catalog_version() -> str:
    path = resources.files("patentqa").joinpath("assets/catalogs/finding_categories.json")
    return json.loads(path.read_text(encoding="utf-8"))["version"]


def _render(template: str, subs: dict) -> str:
    # ``{evidence!r}`` style conversions are resolved by pre-repr'ing values.
    prepared = dict(subs)
    rendered = template
    for key, value in subs.items():
        rendered = rendered.replace("{" + key + "!r}", repr(value))
    return rendered.format_map(_SafeSubs(prepared))


def make_finding(
    category: str,
    location: Location,
    severity: Severity | None = None,
    template_key: str | None = None,
    **subs,
) -> Finding:
    """Build a finding from the category catalog, rendering its templates.

    ``template_key`` lets coherence findings keyed by criterion id reuse the
    per-level template entries while keeping the criterion as the category.
    """
    catalog = category_catalog()
    spec = catalog.get(template_key or category)
    if spec is None:
        raise ConfigurationError(f"no finding template for category {template_key or category!r}")
    resolved_severity = severity or spec.severity
    subs.setdefault("section", _describe_section(location))
    subs.setdefault("figure_label", location.figure_label or "")
    explanation = _render(spec.explanation, subs)
    finding_id = _finding_id(spec.module, category, location, explanation)
    return Finding(
        finding_id=finding_id,
        module=spec.module,
        category=category,
        severity=resolved_severity,
        location=location,
        explanation=explanation,
        recommendation=_render(spec.recommendation, subs),
        root_cause=_render(spec.root_cause, subs),
    )


def _describe_section(location: Location) -> str:
    if location.section_kind is None:
        return "the document"
    if location.section_kind is SectionKind.OTHER:
        return location.section_label or "other"
    return location.section_kind.value


def _finding_id(module: Module, category: str, location: Location, explanation: str) -> str:
    blob = json.dumps(
        [module.value, category, location.to_dict(), explanation], sort_keys=True
    ).encode("utf-8")
    return hashlib.sha1(blob).hexdigest()[:12]


def _location_sort_key(location: Location) -> tuple:
    if location.scope == "document":
        scope_rank = 0
        section_rank = SECTION_ORDER.get(location.section_kind, -1) if location.section_kind else -1
    else:
        scope_rank = 1
        section_rank = SECTION_ORDER.get(location.section_kind, len(SECTION_ORDER))
    return (
        scope_rank,
        section_rank,
        location.section_label or "",
        location.span[0] if location.span else -1,
        location.sentence_id or "",
        location.figure_label or "",
        location.doc_field or "",
    )


def sort_findings(findings: list[Finding]) -> list[Finding]:
    """Canonical report order: chapter sequence, severity (worst first), position."""

    def key(f: Finding):
        loc = _location_sort_key(f.location)
        return (
            loc[0],
            loc[1],
            loc[2],
            -severity_rank(f.severity),
            *loc[3:],
            f.category,
            f.module.value,
        )

    return sorted(findings, key=key)
