"""Corpus-level tables: defect-rate distributions and per-source comparisons."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from patentqa.errors import DomainError
from patentqa.findings import Finding, Module, Severity
from patentqa.model import NAMED_SECTION_KINDS

# Rate columns, in table order.
DIMENSIONS = ("non_compliance", "high_risk", "medium_risk", "low_risk", "figure_inconsistency")
RATE_COLUMNS = DIMENSIONS + ("overall_defect",)


def color_code(rate_percent: float) -> str:
    """Traffic-light banding: green below 5%, yellow 5-10%, red above 10%."""
    if rate_percent < 5.0:
        return "green"
    if rate_percent <= 10.0:
        return "yellow"
    return "red"


@dataclass(frozen=True)
class RateCell:
    numerator: int
    denominator: Optional[int]
    rate_percent: Optional[float]
    color: Optional[str]
    flag: Optional[str] = None  # "no_denominator" when the rate is omitted

    @classmethod
    def build(cls, numerator: int, denominator: Optional[int]) -> "RateCell":
        if not denominator:
            return cls(numerator, denominator, None, None, flag="no_denominator")
        rate = 100.0 * numerator / denominator
        return cls(numerator, denominator, rate, color_code(rate))

    def to_dict(self) -> dict:
        return {
            "numerator": self.numerator,
            "denominator": self.denominator,
            "rate_percent": self.rate_percent,
            "color": self.color,
            "flag": self.flag,
        }


@dataclass
class CorpusRecord:
    """Everything the corpus tables need about one analyzed document."""

    doc_id: str
    ipc_class: str
    source: str
    findings: list[Finding] = field(default_factory=list)
    sentences_by_section: dict[str, int] = field(default_factory=dict)
    figure_pairs: int = 0

    def dimension_counts(self) -> dict[str, int]:
        counts = {dim: 0 for dim in DIMENSIONS}
        for finding in self.findings:
            dim = _dimension_of(finding)
            if dim is not None:
                counts[dim] += 1
        return counts


def _dimension_of(finding: Finding) -> Optional[str]:
    if finding.module is Module.COMPLIANCE:
        return "non_compliance"
    if finding.module is Module.FIGURE_CONSISTENCY:
        return "figure_inconsistency"
    if finding.severity is Severity.HIGH:
        return "high_risk"
    if finding.severity is Severity.MEDIUM:
        return "medium_risk"
    if finding.severity is Severity.LOW:
        return "low_risk"
    return None


def _section_of(finding: Finding) -> Optional[str]:
    kind = finding.location.section_kind
    return kind.value if kind is not None else None


@dataclass
class DistributionTable:
    stratifier: str
    rows: dict[str, dict[str, RateCell]]

    def to_dict(self) -> dict:
        return {
            "stratifier": self.stratifier,
            "columns": list(RATE_COLUMNS),
            "rows": {
                stratum: {col: cell.to_dict() for col, cell in cells.items()}
                for stratum, cells in self.rows.items()
            },
        }


def defect_distribution(records: Sequence[CorpusRecord], stratifier: str) -> DistributionTable:
    """Rates per stratum; sentence tallies are the denominators, pairs for figures."""
    if stratifier not in ("by_section", "by_ipc_class"):
        raise DomainError(f"unknown stratifier {stratifier!r}")
    if not records:
        raise DomainError("empty corpus")

    if stratifier == "by_section":
        strata = [k.value for k in NAMED_SECTION_KINDS]
    else:
        strata = sorted({r.ipc_class for r in records})

    rows: dict[str, dict[str, RateCell]] = {}
    for stratum in strata:
        finding_counts = {dim: 0 for dim in DIMENSIONS}
        defect_sentences: set[tuple[str, str]] = set()
        sentence_denominator = 0
        pair_denominator = 0
        for record in records:
            in_stratum_doc = stratifier == "by_ipc_class" and record.ipc_class == stratum
            if stratifier == "by_section":
                sentence_denominator += record.sentences_by_section.get(stratum, 0)
            elif in_stratum_doc:
                sentence_denominator += sum(record.sentences_by_section.values())
            for finding in record.findings:
                if stratifier == "by_section":
                    if _section_of(finding) != stratum:
                        continue
                elif not in_stratum_doc:
                    continue
                dim = _dimension_of(finding)
                if dim is not None:
                    finding_counts[dim] += 1
                if finding.location.sentence_id is not None:
                    defect_sentences.add((record.doc_id, finding.location.sentence_id))
            if stratifier == "by_section":
                if stratum == "brief_description_of_drawings":
                    pair_denominator += record.figure_pairs
            elif in_stratum_doc:
                pair_denominator += record.figure_pairs

        cells: dict[str, RateCell] = {}
        for dim in DIMENSIONS:
            denominator = pair_denominator if dim == "figure_inconsistency" else sentence_denominator
            cells[dim] = RateCell.build(finding_counts[dim], denominator)
        cells["overall_defect"] = RateCell.build(len(defect_sentences), sentence_denominator)
        rows[stratum] = cells
    return DistributionTable(stratifier=stratifier, rows=rows)


@dataclass
class ComparisonTable:
    """Per-source means with pairwise differences and permutation p-values."""

    groups: tuple[str, ...]
    n_per_group: dict[str, int]
    means: dict[str, dict[str, float]]  # dimension -> group -> mean
    totals: dict[str, float]  # group -> sum of dimension means
    differences: dict[str, dict[str, float]]  # dimension (or "total") -> "g1-g2" -> diff
    p_values: dict[str, dict[str, float]]
    permutations: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "groups": list(self.groups),
            "n_per_group": dict(self.n_per_group),
            "dimensions": list(DIMENSIONS),
            "means": {d: dict(v) for d, v in self.means.items()},
            "totals": dict(self.totals),
            "differences": {d: dict(v) for d, v in self.differences.items()},
            "p_values": {d: dict(v) for d, v in self.p_values.items()},
            "permutations": self.permutations,
            "seed": self.seed,
        }


def totals_from_means(means: dict[str, dict[str, float]], groups: Sequence[str]) -> dict[str, float]:
    """Total defects per document for each group: the sum over dimension means."""
    return {g: sum(means[dim][g] for dim in DIMENSIONS) for g in groups}


def permutation_pvalue(
    x: Sequence[float], y: Sequence[float], permutations: int, rng: np.random.Generator
) -> float:
    """Two-sided label-permutation test on the difference of group means."""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    observed = abs(x_arr.mean() - y_arr.mean())
    pooled = np.concatenate([x_arr, y_arr])
    n_x = len(x_arr)
    hits = 0
    for _ in range(permutations):
        shuffled = rng.permutation(pooled)
        stat = abs(shuffled[:n_x].mean() - shuffled[n_x:].mean())
        if stat >= observed - 1e-12:
            hits += 1
    return (hits + 1) / (permutations + 1)


def source_comparison(
    records: Sequence[CorpusRecord],
    permutations: int = 10_000,
    seed: int = 0,
) -> ComparisonTable:
    """Group per-document defect counts by source and compare all source pairs."""
    by_group: dict[str, list[dict[str, int]]] = {}
    for record in records:
        by_group.setdefault(record.source, []).append(record.dimension_counts())
    groups = tuple(sorted(by_group))
    if len(groups) < 2:
        raise DomainError("source comparison needs at least two non-empty groups")

    means: dict[str, dict[str, float]] = {dim: {} for dim in DIMENSIONS}
    per_doc: dict[str, dict[str, list[int]]] = {dim: {} for dim in DIMENSIONS}
    total_per_doc: dict[str, list[int]] = {}
    for group in groups:
        docs = by_group[group]
        total_per_doc[group] = [sum(d.values()) for d in docs]
        for dim in DIMENSIONS:
            values = [d[dim] for d in docs]
            per_doc[dim][group] = values
            means[dim][group] = float(np.mean(values))

    differences: dict[str, dict[str, float]] = {}
    p_values: dict[str, dict[str, float]] = {}
    pair_names = [
        (a, b) for i, a in enumerate(groups) for b in groups[i + 1 :]
    ]
    rng = np.random.default_rng(seed)
    for dim in DIMENSIONS:
        differences[dim] = {}
        p_values[dim] = {}
        for a, b in pair_names:
            key = f"{a}-{b}"
            differences[dim][key] = means[dim][a] - means[dim][b]
            p_values[dim][key] = permutation_pvalue(
                per_doc[dim][a], per_doc[dim][b], permutations, rng
            )
    differences["total"] = {}
    p_values["total"] = {}
    totals = totals_from_means(means, groups)
    for a, b in pair_names:
        key = f"{a}-{b}"
        differences["total"][key] = totals[a] - totals[b]
        p_values["total"][key] = permutation_pvalue(
            total_per_doc[a], total_per_doc[b], permutations, rng
        )

    return ComparisonTable(
        groups=groups,
        n_per_group={g: len(by_group[g]) for g in groups},
        means=means,
        totals=totals,
        differences=differences,
        p_values=p_values,
        permutations=permutations,
        seed=seed,
    )
