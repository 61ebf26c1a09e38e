"""Filing-readiness synthesis: aggregation, classification, report generation."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional

from patentqa.errors import ConfigurationError, UsageError
from patentqa.findings import Finding, Module, Severity, sort_findings
from patentqa.model import PatentDocument, SectionKind

REPORT_SCHEMA = "patentqa.report/1"


class ReadinessLevel(str, Enum):
    FILING_READY = "filing_ready"
    MINOR_REVISION_NEEDED = "minor_revision_needed"
    MAJOR_REVISION_NEEDED = "major_revision_needed"
    SIGNIFICANT_REWORK_REQUIRED = "significant_rework_required"


READINESS_ORDER: tuple[ReadinessLevel, ...] = (
    ReadinessLevel.FILING_READY,
    ReadinessLevel.MINOR_REVISION_NEEDED,
    ReadinessLevel.MAJOR_REVISION_NEEDED,
    ReadinessLevel.SIGNIFICANT_REWORK_REQUIRED,
)
_READINESS_RANK = {lvl: i for i, lvl in enumerate(READINESS_ORDER)}

# CLI exit status per readiness level.
READINESS_EXIT_CODES = {lvl: i for i, lvl in enumerate(READINESS_ORDER)}


def readiness_rank(level: ReadinessLevel) -> int:
    return _READINESS_RANK[level]


@dataclass
class DefectSummary:
    findings: list[Finding] = field(default_factory=list)  # deduplicated
    by_severity: Counter = field(default_factory=Counter)
    by_module: Counter = field(default_factory=Counter)
    duplicates_dropped: int = 0

    @property
    def total(self) -> int:
        return len(self.findings)


def aggregate(findings: list[Finding]) -> DefectSummary:
    """Merge findings from all modules; identical (module, category, location) collapse."""
    summary = DefectSummary()
    seen: set[tuple] = set()
    for finding in findings:
        key = finding.dedup_key()
        if key in seen:
            summary.duplicates_dropped += 1
            continue
        seen.add(key)
        summary.findings.append(finding)
        summary.by_severity[finding.severity.value] += 1
        summary.by_module[finding.module.value] += 1
    return summary


@dataclass(frozen=True)
class PolicyCondition:
    min_count: int
    severity: Optional[str] = None
    module: Optional[str] = None
    total: bool = False

    def met(self, summary: DefectSummary) -> bool:
        if self.total:
            return summary.total >= self.min_count
        if self.severity is not None:
            return summary.by_severity.get(self.severity, 0) >= self.min_count
        return summary.by_module.get(self.module, 0) >= self.min_count


@dataclass(frozen=True)
class ReadinessPolicy:
    policy_id: str
    version: str
    rules: tuple[tuple[ReadinessLevel, tuple[PolicyCondition, ...]], ...]
    otherwise: ReadinessLevel = ReadinessLevel.FILING_READY


def load_policy(path: str | Path | None = None) -> ReadinessPolicy:
    if path is None:
        raw = resources.files("patentqa").joinpath(
            "assets/policies/default_readiness.json"
        ).read_text(encoding="utf-8")
        origin = "<packaged default>"
    else:
        path = Path(path)
        origin = str(path)
        try:
            raw = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigurationError(f"cannot read readiness policy {path}: {e}") from e
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"readiness policy {origin} is not valid JSON: {e}") from e

    rules: list[tuple[ReadinessLevel, tuple[PolicyCondition, ...]]] = []
    for i, raw_rule in enumerate(data.get("rules", [])):
        try:
            level = ReadinessLevel(raw_rule["level"])
        except (KeyError, ValueError):
            raise ConfigurationError(f"rule {i} in {origin} has an invalid readiness level")
        if level is ReadinessLevel.FILING_READY:
            raise ConfigurationError(
                f"rule {i} in {origin} assigns filing_ready from finding counts; "
                "thresholds may only worsen the level (non-monotone policy)"
            )
        conditions: list[PolicyCondition] = []
        for j, raw_cond in enumerate(raw_rule.get("any_of", [])):
            where = f"rule {i} condition {j} in {origin}"
            min_count = raw_cond.get("min")
            if not isinstance(min_count, int) or min_count < 1:
                raise ConfigurationError(f"{where}: 'min' must be a positive integer")
            keys = set(raw_cond) - {"min"}
            if keys == {"severity"}:
                severity = raw_cond["severity"]
                if severity not in {s.value for s in Severity}:
                    raise ConfigurationError(f"{where}: unknown severity {severity!r}")
                conditions.append(PolicyCondition(min_count=min_count, severity=severity))
            elif keys == {"module"}:
                module = raw_cond["module"]
                if module not in {m.value for m in Module}:
                    raise ConfigurationError(f"{where}: unknown module {module!r}")
                conditions.append(PolicyCondition(min_count=min_count, module=module))
            elif keys == {"total"}:
                conditions.append(PolicyCondition(min_count=min_count, total=True))
            else:
                raise ConfigurationError(f"{where}: expected exactly one of severity/module/total")
        if not conditions:
            raise ConfigurationError(f"rule {i} in {origin} has no conditions")
        rules.append((level, tuple(conditions)))

    try:
        otherwise = ReadinessLevel(data.get("otherwise", "filing_ready"))
    except ValueError:
        raise ConfigurationError(f"policy {origin} has an invalid 'otherwise' level")
    if otherwise is not ReadinessLevel.FILING_READY:
        raise ConfigurationError(
            f"policy {origin}: 'otherwise' must be filing_ready (non-monotone policy)"
        )

    return ReadinessPolicy(
        policy_id=data.get("policy_id", "custom"),
        version=str(data.get("version", "1")),
        rules=tuple(rules),
    )


_default_policy: ReadinessPolicy | None = None


def default_policy() -> ReadinessPolicy:
    global _default_policy
    if _default_policy is None:
        _default_policy = load_policy(None)
    return _default_policy


def classify_readiness(summary: DefectSummary, policy: ReadinessPolicy | None = None) -> ReadinessLevel:
    """Worst triggered rule wins; count thresholds can only worsen the verdict."""
    policy = policy or default_policy()
    worst = policy.otherwise
    for level, conditions in policy.rules:
        if any(cond.met(summary) for cond in conditions):
            if readiness_rank(level) > readiness_rank(worst):
                worst = level
    return worst


@dataclass
class ReadinessReport:
    doc_id: str
    readiness: ReadinessLevel
    findings: list[Finding]
    tallies_by_section: dict[str, int]
    tallies_by_severity: dict[str, int]
    denominators: dict
    coverage: dict
    metadata: dict
    duplicates_dropped: int = 0

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "doc_id": self.doc_id,
            "readiness": self.readiness.value,
            "findings": [f.to_dict() for f in self.findings],
            "tallies_by_section": dict(self.tallies_by_section),
            "tallies_by_severity": dict(self.tallies_by_severity),
            "denominators": self.denominators,
            "coverage": self.coverage,
            "metadata": self.metadata,
            "duplicates_dropped": self.duplicates_dropped,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReadinessReport":
        if data.get("schema") != REPORT_SCHEMA:
            raise UsageError(f"unsupported report schema {data.get('schema')!r}")
        return cls(
            doc_id=data["doc_id"],
            readiness=ReadinessLevel(data["readiness"]),
            findings=[Finding.from_dict(f) for f in data["findings"]],
            tallies_by_section=dict(data["tallies_by_section"]),
            tallies_by_severity=dict(data["tallies_by_severity"]),
            denominators=data["denominators"],
            coverage=data["coverage"],
            metadata=data["metadata"],
            duplicates_dropped=data.get("duplicates_dropped", 0),
        )


def _section_bucket(finding: Finding) -> str:
    location = finding.location
    if location.scope == "document" and location.section_kind is None:
        return "document"
    if location.section_kind is None:
        return "document"
    if location.section_kind is SectionKind.OTHER:
        return f"other:{location.section_label}"
    return location.section_kind.value


def generate_report(
    doc: PatentDocument,
    summary: DefectSummary,
    readiness: ReadinessLevel,
    coverage: dict | None = None,
    metadata: dict | None = None,
    denominators: dict | None = None,
) -> ReadinessReport:
    ordered = sort_findings(summary.findings)
    by_section: dict[str, int] = {}
    for finding in ordered:
        bucket = _section_bucket(finding)
        by_section[bucket] = by_section.get(bucket, 0) + 1
    by_severity = {sev.value: summary.by_severity.get(sev.value, 0) for sev in Severity}
    by_severity = {k: v for k, v in by_severity.items() if v}
    return ReadinessReport(
        doc_id=doc.doc_id,
        readiness=readiness,
        findings=ordered,
        tallies_by_section=dict(sorted(by_section.items())),
        tallies_by_severity=dict(sorted(by_severity.items())),
        denominators=denominators or {},
        coverage=coverage or {},
        metadata=metadata or {},
        duplicates_dropped=summary.duplicates_dropped,
    )


RENDER_FORMATS = ("structured", "text", "markdown")


def render_report(report: ReadinessReport, fmt: str = "structured") -> bytes:
    """Serialize a report; byte-identical for equal reports."""
    if fmt == "structured":
        return (json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "text":
        return _render_text(report).encode("utf-8")
    if fmt == "markdown":
        return _render_markdown(report).encode("utf-8")
    raise UsageError(f"unknown report format {fmt!r}; expected one of {RENDER_FORMATS}")


def parse_report(data: bytes | str) -> ReadinessReport:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return ReadinessReport.from_dict(json.loads(data))


_READINESS_TITLES = {
    ReadinessLevel.FILING_READY: "Filing Ready",
    ReadinessLevel.MINOR_REVISION_NEEDED: "Minor Revision Needed",
    ReadinessLevel.MAJOR_REVISION_NEEDED: "Major Revision Needed",
    ReadinessLevel.SIGNIFICANT_REWORK_REQUIRED: "Significant Rework Required",
}


def _location_text(finding: Finding) -> str:
    loc = finding.location
    parts = []
    if loc.scope == "document" and loc.section_kind is None and not loc.doc_field:
        parts.append("document")
    if loc.doc_field:
        parts.append(loc.doc_field)
    if loc.section_kind is not None:
        parts.append(
            loc.section_label if loc.section_kind is SectionKind.OTHER else loc.section_kind.value
        )
    if loc.sentence_id:
        parts.append(loc.sentence_id)
    if loc.figure_label:
        parts.append(loc.figure_label)
    if loc.span:
        parts.append(f"chars {loc.span[0]}-{loc.span[1]}")
    return " / ".join(p for p in parts if p)


def _render_text(report: ReadinessReport) -> str:
    lines = [
        f"Readiness report for {report.doc_id}",
        f"Verdict: {_READINESS_TITLES[report.readiness]}",
        f"Findings: {len(report.findings)}",
        "",
    ]
    for i, finding in enumerate(report.findings, 1):
        lines.append(
            f"{i:3d}. [{finding.severity.value.upper():6s}] {finding.module.value}"
            f"/{finding.category} @ {_location_text(finding)}"
        )
        lines.append(f"     {finding.explanation}")
        lines.append(f"     fix: {finding.recommendation}")
        lines.append(f"     cause: {finding.root_cause}")
    if report.coverage:
        lines.append("")
        lines.append(f"Coverage: {json.dumps(report.coverage, sort_keys=True)}")
    lines.append("")
    return "\n".join(lines)


def _render_markdown(report: ReadinessReport) -> str:
    lines = [
        f"# Readiness report: {report.doc_id}",
        "",
        f"**Verdict: {_READINESS_TITLES[report.readiness]}** "
        f"({len(report.findings)} finding(s))",
        "",
    ]
    if report.findings:
        lines.append("| # | Severity | Module | Category | Location | Explanation |")
        lines.append("|---|----------|--------|----------|----------|-------------|")
        for i, finding in enumerate(report.findings, 1):
            explanation = finding.explanation.replace("|", "\\|")
            lines.append(
                f"| {i} | {finding.severity.value} | {finding.module.value} "
                f"| {finding.category} | {_location_text(finding)} | {explanation} |"
            )
        lines.append("")
        lines.append("## Recommendations")
        lines.append("")
        for i, finding in enumerate(report.findings, 1):
            lines.append(f"{i}. {finding.recommendation}")
    else:
        lines.append("No findings.")
    lines.append("")
    return "\n".join(lines)
