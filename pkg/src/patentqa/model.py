"""Canonical document model: sections, sentences, claims, and figure manifests."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from patentqa.errors import StructuralError


class SectionKind(str, Enum):
    TECHNICAL_FIELD = "technical_field"
    BACKGROUND = "background"
    INVENTION_CONTENT = "invention_content"
    BRIEF_DESCRIPTION_OF_DRAWINGS = "brief_description_of_drawings"
    DETAILED_EMBODIMENTS = "detailed_embodiments"
    OTHER = "other"


NAMED_SECTION_KINDS: tuple[SectionKind, ...] = (
    SectionKind.TECHNICAL_FIELD,
    SectionKind.BACKGROUND,
    SectionKind.INVENTION_CONTENT,
    SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
    SectionKind.DETAILED_EMBODIMENTS,
)

# Canonical chapter order used for report sorting; unknown sections sort last.
SECTION_ORDER: dict[SectionKind, int] = {k: i for i, k in enumerate(NAMED_SECTION_KINDS)}
SECTION_ORDER[SectionKind.OTHER] = len(NAMED_SECTION_KINDS)


class PatentType(str, Enum):
    INVENTION = "invention"
    UTILITY_MODEL = "utility_model"


class IpcClass(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"
    H = "H"


class Source(str, Enum):
    HUMAN = "human"
    TOOL_A = "tool_a"
    TOOL_B = "tool_b"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Sentence:
    """One segmented sentence; ``char_span`` indexes into the section raw_text."""

    sentence_id: str
    section_kind: SectionKind
    section_label: Optional[str]
    ordinal: int
    text: str
    char_span: tuple[int, int]
    is_template: bool = False


@dataclass
class Section:
    kind: SectionKind
    raw_text: str
    sentences: list[Sentence] = field(default_factory=list)
    label: Optional[str] = None  # set only for kind == OTHER

    @property
    def key(self) -> str:
        if self.kind is SectionKind.OTHER:
            return f"other:{self.label}"
        return self.kind.value


@dataclass(frozen=True)
class Claim:
    number: int
    text: str
    depends_on: Optional[int] = None


@dataclass(frozen=True)
class FigureEntry:
    figure_label: str
    visible_numerals: tuple[str, ...]
    depicted_elements: Optional[tuple[tuple[str, str], ...]] = None
    image_path: Optional[str] = None


@dataclass
class FigureManifest:
    entries: list[FigureEntry] = field(default_factory=list)

    def labels(self) -> list[str]:
        return [e.figure_label for e in self.entries]

    def entry(self, label: str) -> Optional[FigureEntry]:
        for e in self.entries:
            if e.figure_label == label:
                return e
        return None


@dataclass
class PatentDocument:
    doc_id: str
    title: str
    abstract: str
    patent_type: PatentType
    ipc_class: IpcClass
    source: Source
    sections: list[Section] = field(default_factory=list)
    claims: list[Claim] = field(default_factory=list)
    figure_manifest: Optional[FigureManifest] = None

    def section(self, kind: SectionKind, label: Optional[str] = None) -> Optional[Section]:
        for s in self.sections:
            if s.kind is kind and (kind is not SectionKind.OTHER or s.label == label):
                return s
        return None

    def sentences(self) -> Iterator[Sentence]:
        for section in self.sections:
            yield from section.sentences

    def validate(self) -> None:
        """Re-check every model invariant, raising StructuralError on the first breach."""
        seen_keys: set[str] = set()
        for i, section in enumerate(self.sections):
            if section.kind is SectionKind.OTHER and not section.label:
                raise StructuralError("section of kind 'other' must carry a label", f"sections[{i}]")
            if section.key in seen_keys:
                raise StructuralError(f"duplicate section {section.key!r}", f"sections[{i}]")
            seen_keys.add(section.key)

        seen_sentence_ids: set[str] = set()
        for section in self.sections:
            prev_end = -1
            for s in section.sentences:
                if s.sentence_id in seen_sentence_ids:
                    raise StructuralError(f"duplicate sentence id {s.sentence_id!r}")
                seen_sentence_ids.add(s.sentence_id)
                if not s.text.strip():
                    raise StructuralError(f"empty sentence {s.sentence_id!r}")
                start, end = s.char_span
                if not (0 <= start < end <= len(section.raw_text)):
                    raise StructuralError(f"sentence span out of bounds for {s.sentence_id!r}")
                if start < prev_end:
                    raise StructuralError(f"overlapping sentence spans at {s.sentence_id!r}")
                if section.raw_text[start:end] != s.text:
                    raise StructuralError(f"sentence text does not match its span for {s.sentence_id!r}")
                prev_end = end

        for i, claim in enumerate(self.claims):
            if claim.number != i + 1:
                raise StructuralError(
                    f"claim numbering gap: expected {i + 1}, found {claim.number}", f"claims[{i}]"
                )
            if claim.depends_on is not None and not (1 <= claim.depends_on < claim.number):
                raise StructuralError(
                    f"claim {claim.number} depends on {claim.depends_on}, which is not a lower-numbered claim",
                    f"claims[{i}]",
                )

        if self.figure_manifest is not None:
            seen_labels: set[str] = set()
            for i, entry in enumerate(self.figure_manifest.entries):
                if entry.figure_label in seen_labels:
                    raise StructuralError(
                        f"duplicate figure label {entry.figure_label!r}", f"figures[{i}]"
                    )
                seen_labels.add(entry.figure_label)
                if entry.depicted_elements:
                    visible = set(entry.visible_numerals)
                    for numeral, _name in entry.depicted_elements:
                        if numeral not in visible:
                            raise StructuralError(
                                f"figure {entry.figure_label!r} depicts numeral {numeral!r} "
                                "that is not in its visible numerals",
                                f"figures[{i}]",
                            )
