"""Annotation and prediction files: the labeled-item exchange format for evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from patentqa.errors import EvaluationError
from patentqa.model import PatentDocument

ANNOTATION_SCHEMA = "patentqa.annotations/1"
PREDICTION_SCHEMA = "patentqa.predictions/1"

COMPLIANCE_CLASSES = ("compliant", "non_compliant")
RISK_CLASSES = ("high", "medium", "low", "safe")
PAIR_CLASSES = ("consistent", "inconsistent")

_COMPLIANCE_CATEGORIES = {
    "prohibited_commercial_language",
    "inconsistent_terminology",
    "missing_mandatory_section",
    "improper_title_abstract_format",
    "orthographic_error",
    "insufficient_figure_description",
}


@dataclass
class DocumentLabels:
    """Per-document labels; sentence maps use sentence ids, pair maps figure labels."""

    doc_id: str
    compliance: dict[str, str] = field(default_factory=dict)  # "compliant" or a category
    risk: dict[str, str] = field(default_factory=dict)  # safe/low/medium/high
    figure_pairs: dict[str, str] = field(default_factory=dict)  # consistent/inconsistent

    def validate(self, doc: Optional[PatentDocument] = None) -> None:
        for sid, label in self.compliance.items():
            if label != "compliant" and label not in _COMPLIANCE_CATEGORIES:
                raise EvaluationError(f"{self.doc_id}/{sid}: unknown compliance label {label!r}")
        for sid, label in self.risk.items():
            if label not in RISK_CLASSES:
                raise EvaluationError(f"{self.doc_id}/{sid}: unknown risk label {label!r}")
        for pair, label in self.figure_pairs.items():
            if label not in PAIR_CLASSES:
                raise EvaluationError(f"{self.doc_id}/{pair}: unknown pair label {label!r}")
        if doc is not None:
            known = {s.sentence_id for s in doc.sentences()}
            for sid in list(self.compliance) + list(self.risk):
                if sid not in known:
                    raise EvaluationError(
                        f"{self.doc_id}: labeled sentence {sid!r} does not exist in the document"
                    )
            if doc.figure_manifest is not None:
                labels = set(doc.figure_manifest.labels())
                for pair in self.figure_pairs:
                    if pair not in labels:
                        raise EvaluationError(
                            f"{self.doc_id}: labeled figure {pair!r} does not exist in the manifest"
                        )


@dataclass
class LabelSet:
    """A collection of per-document labels, either gold annotations or predictions."""

    schema: str
    docs: dict[str, DocumentLabels] = field(default_factory=dict)
    annotator_id: Optional[str] = None
    schema_version: str = "1"

    def add(self, labels: DocumentLabels) -> None:
        self.docs[labels.doc_id] = labels

    def binary_compliance(self) -> dict[tuple[str, str], str]:
        """Collapse per-category compliance labels to the binary task."""
        out: dict[tuple[str, str], str] = {}
        for doc_id, labels in self.docs.items():
            for sid, label in labels.compliance.items():
                out[(doc_id, sid)] = "compliant" if label == "compliant" else "non_compliant"
        return out

    def risk_items(self) -> dict[tuple[str, str], str]:
        return {
            (doc_id, sid): label
            for doc_id, labels in self.docs.items()
            for sid, label in labels.risk.items()
        }

    def pair_items(self) -> dict[tuple[str, str], str]:
        return {
            (doc_id, pair): label
            for doc_id, labels in self.docs.items()
            for pair, label in labels.figure_pairs.items()
        }

    def to_dict(self) -> dict:
        payload = {
            "schema": self.schema,
            "schema_version": self.schema_version,
            "docs": [
                {
                    "doc_id": labels.doc_id,
                    "compliance": dict(sorted(labels.compliance.items())),
                    "risk": dict(sorted(labels.risk.items())),
                    "figure_pairs": dict(sorted(labels.figure_pairs.items())),
                }
                for _, labels in sorted(self.docs.items())
            ],
        }
        if self.annotator_id is not None:
            payload["annotator_id"] = self.annotator_id
        return payload

    @classmethod
    def from_dict(cls, data: dict) -> "LabelSet":
        schema = data.get("schema")
        if schema not in (ANNOTATION_SCHEMA, PREDICTION_SCHEMA):
            raise EvaluationError(f"unsupported label-set schema {schema!r}")
        label_set = cls(
            schema=schema,
            annotator_id=data.get("annotator_id"),
            schema_version=str(data.get("schema_version", "1")),
        )
        for raw in data.get("docs", []):
            labels = DocumentLabels(
                doc_id=raw["doc_id"],
                compliance=dict(raw.get("compliance", {})),
                risk=dict(raw.get("risk", {})),
                figure_pairs=dict(raw.get("figure_pairs", {})),
            )
            labels.validate()
            label_set.add(labels)
        return label_set

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "LabelSet":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise EvaluationError(f"cannot read label set {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise EvaluationError(f"label set {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)
