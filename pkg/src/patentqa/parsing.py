"""Parse the structured JSON document format into the canonical model and back.

The input format is documented field-by-field in ``assets/schemas/document.schema.json``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from patentqa.errors import ParseError, StructuralError
from patentqa.model import (
    Claim,
    FigureEntry,
    FigureManifest,
    IpcClass,
    NAMED_SECTION_KINDS,
    PatentDocument,
    PatentType,
    Section,
    SectionKind,
    Source,
)
from patentqa.segmentation import segment_sentences

_TOP_LEVEL_FIELDS = {
    "doc_id",
    "title",
    "abstract",
    "patent_type",
    "ipc_class",
    "source",
    "sections",
    "claims",
    "figures",
}
_SECTION_FIELDS = {"kind", "text"}
_CLAIM_FIELDS = {"number", "text", "depends_on"}
_FIGURE_FIELDS = {"figure_label", "visible_numerals", "depicted_elements", "image_path"}

_NAMED_KIND_VALUES = {k.value: k for k in NAMED_SECTION_KINDS}


def _require(data: dict, key: str, kind: type, where: str) -> Any:
    if key not in data:
        raise ParseError(f"missing required field {key!r}", where)
    value = data[key]
    if not isinstance(value, kind):
        raise ParseError(f"field {key!r} must be {kind.__name__}", f"{where}.{key}")
    return value


def _check_unknown(data: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ParseError(f"unknown field(s) {', '.join(unknown)}", where)


def _parse_enum(enum_cls, raw: str, where: str):
    try:
        return enum_cls(raw)
    except ValueError:
        valid = ", ".join(e.value for e in enum_cls)
        raise ParseError(f"invalid value {raw!r}; expected one of: {valid}", where) from None


def parse_document(raw: dict | str | bytes) -> PatentDocument:
    """Parse a JSON object (or JSON text) into a validated PatentDocument."""
    if isinstance(raw, (str, bytes)):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ParseError(f"invalid JSON: {e.msg}", f"line {e.lineno}, column {e.colno}") from e
    else:
        data = raw
    if not isinstance(data, dict):
        raise ParseError("document root must be a JSON object", "$")

    _check_unknown(data, _TOP_LEVEL_FIELDS, "$")
    doc_id = _require(data, "doc_id", str, "$")
    title = _require(data, "title", str, "$")
    abstract = _require(data, "abstract", str, "$")
    patent_type = _parse_enum(PatentType, _require(data, "patent_type", str, "$"), "$.patent_type")
    ipc_class = _parse_enum(IpcClass, _require(data, "ipc_class", str, "$"), "$.ipc_class")
    source = _parse_enum(Source, _require(data, "source", str, "$"), "$.source")

    sections: list[Section] = []
    raw_sections = _require(data, "sections", list, "$")
    for i, raw_section in enumerate(raw_sections):
        where = f"$.sections[{i}]"
        if not isinstance(raw_section, dict):
            raise ParseError("section must be an object", where)
        _check_unknown(raw_section, _SECTION_FIELDS, where)
        kind_value = _require(raw_section, "kind", str, where)
        text = _require(raw_section, "text", str, where)
        kind = _NAMED_KIND_VALUES.get(kind_value)
        if kind is not None:
            section = Section(kind=kind, raw_text=text)
        else:
            section = Section(kind=SectionKind.OTHER, raw_text=text, label=kind_value)
        section.sentences = segment_sentences(section)
        sections.append(section)

    claims: list[Claim] = []
    raw_claims = _require(data, "claims", list, "$")
    for i, raw_claim in enumerate(raw_claims):
        where = f"$.claims[{i}]"
        if not isinstance(raw_claim, dict):
            raise ParseError("claim must be an object", where)
        _check_unknown(raw_claim, _CLAIM_FIELDS, where)
        number = _require(raw_claim, "number", int, where)
        text = _require(raw_claim, "text", str, where)
        depends_on = raw_claim.get("depends_on")
        if depends_on is not None and not isinstance(depends_on, int):
            raise ParseError("field 'depends_on' must be an integer or null", f"{where}.depends_on")
        claims.append(Claim(number=number, text=text, depends_on=depends_on))

    manifest = None
    if "figures" in data:
        raw_figures = data["figures"]
        if raw_figures is not None:
            if not isinstance(raw_figures, list):
                raise ParseError("field 'figures' must be an array or null", "$.figures")
            entries: list[FigureEntry] = []
            for i, raw_entry in enumerate(raw_figures):
                where = f"$.figures[{i}]"
                if not isinstance(raw_entry, dict):
                    raise ParseError("figure entry must be an object", where)
                _check_unknown(raw_entry, _FIGURE_FIELDS, where)
                label = _require(raw_entry, "figure_label", str, where)
                numerals = _require(raw_entry, "visible_numerals", list, where)
                if not all(isinstance(n, str) for n in numerals):
                    raise ParseError("visible_numerals must be strings", f"{where}.visible_numerals")
                depicted = raw_entry.get("depicted_elements")
                depicted_tuple = None
                if depicted is not None:
                    if not isinstance(depicted, list):
                        raise ParseError(
                            "depicted_elements must be an array or null", f"{where}.depicted_elements"
                        )
                    pairs = []
                    for j, pair in enumerate(depicted):
                        if (
                            not isinstance(pair, list)
                            or len(pair) != 2
                            or not all(isinstance(x, str) for x in pair)
                        ):
                            raise ParseError(
                                "depicted element must be a [numeral, name] pair of strings",
                                f"{where}.depicted_elements[{j}]",
                            )
                        pairs.append((pair[0], pair[1]))
                    depicted_tuple = tuple(pairs)
                image_path = raw_entry.get("image_path")
                if image_path is not None and not isinstance(image_path, str):
                    raise ParseError("image_path must be a string or null", f"{where}.image_path")
                entries.append(
                    FigureEntry(
                        figure_label=label,
                        visible_numerals=tuple(sorted(set(numerals), key=_numeral_sort_key)),
                        depicted_elements=depicted_tuple,
                        image_path=image_path,
                    )
                )
            manifest = FigureManifest(entries=entries)

    doc = PatentDocument(
        doc_id=doc_id,
        title=title,
        abstract=abstract,
        patent_type=patent_type,
        ipc_class=ipc_class,
        source=source,
        sections=sections,
        claims=claims,
        figure_manifest=manifest,
    )
    doc.validate()
    return doc


def _numeral_sort_key(numeral: str):
    return (0, int(numeral)) if numeral.isdigit() else (1, numeral)


def document_to_dict(doc: PatentDocument) -> dict:
    """Inverse of parse_document: parse_document(document_to_dict(doc)) == doc."""
    data: dict[str, Any] = {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "abstract": doc.abstract,
        "patent_type": doc.patent_type.value,
        "ipc_class": doc.ipc_class.value,
        "source": doc.source.value,
        "sections": [
            {"kind": s.label if s.kind is SectionKind.OTHER else s.kind.value, "text": s.raw_text}
            for s in doc.sections
        ],
        "claims": [
            {"number": c.number, "text": c.text, "depends_on": c.depends_on} for c in doc.claims
        ],
    }
    if doc.figure_manifest is not None:
        data["figures"] = [
            {
                "figure_label": e.figure_label,
                "visible_numerals": list(e.visible_numerals),
                "depicted_elements": (
                    [list(pair) for pair in e.depicted_elements]
                    if e.depicted_elements is not None
                    else None
                ),
                "image_path": e.image_path,
            }
            for e in doc.figure_manifest.entries
        ]
    return data


def dump_document(doc: PatentDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n"


def load_document(path: str | Path) -> PatentDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read document: {e}", str(path)) from e
    try:
        return parse_document(text)
    except StructuralError:
        raise
    except ParseError as e:
        raise ParseError(f"{path}: {e}") from e
