"""Synthetic patent generator: certified-clean documents for detector verification.

Every random choice is driven by the seed; the same parameters always yield the
same document. Output is clean by construction: consistent element/numeral
bindings, claims covering every element, drawings descriptions listing every
callout, and vocabulary drawn from the default profile wordlist.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from patentqa.errors import GenerationError
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

ELEMENT_NAMES = (
    "housing", "rotor", "shaft", "bearing", "bracket", "flange", "piston",
    "valve", "gear", "spring", "lever", "coupling", "frame", "panel",
    "nozzle", "baffle", "hub", "collar", "sleeve", "gasket",
)

# Names reserved for injections: never used by the generator itself.
INJECTION_NAME_POOL = (
    "casing", "clamp", "spindle", "damper", "fitting", "washer",
    "grommet", "strut", "fastener", "plug",
)

VERBS_3P = ("encloses", "supports", "drives", "engages", "receives", "guides", "retains")
VERBS_BASE = ("enclose", "support", "drive", "engage", "receive", "guide", "retain")

FIELD_DOMAINS = ("industrial", "mechanical", "processing", "conveying")

BACKGROUND_POOL = (
    "Conventional arrangements of this type require frequent adjustment.",
    "Known systems rely on rigid mounting structures that add assembly cost.",
    "Existing solutions are limited by wear between moving parts.",
    "There remains a need for a compact arrangement that reduces maintenance.",
    "Installation of such systems requires considerable manual effort.",
)

INVENTION_FILLER_POOL = (
    "The arrangement reduces vibration during operation.",
    "Each component is positioned to maintain a stable clearance.",
    "The structure provides considerable rigidity under load.",
)

EMBODIMENT_FILLER_POOL = (
    "During operation, the arrangement can maintain a tight engagement.",
    "This configuration reduces wear over the operating margin.",
    "Assembly is achieved without additional fasteners.",
)

TEMPLATE_SENTENCE = (
    "The above embodiments are merely illustrative and are not intended to "
    "limit the scope of protection."
)

NO_FIGURES_SENTENCE = "No drawings accompany the present description."


@dataclass(frozen=True)
class GenerationParams:
    seed: int = 0
    element_count: int = 6
    claims_count: int = 4
    figures_count: int = 2
    background_sentences: tuple[int, int] = (2, 4)
    invention_filler: tuple[int, int] = (1, 2)
    embodiment_filler: tuple[int, int] = (1, 2)
    template_sentences: int = 1
    vocabulary: str = "mechanical"
    sections: tuple[SectionKind, ...] = NAMED_SECTION_KINDS
    ipc_class: Optional[IpcClass] = None
    patent_type: Optional[PatentType] = None
    source: Source = Source.UNKNOWN
    doc_id: Optional[str] = None

    def validate(self) -> None:
        if self.vocabulary != "mechanical":
            raise GenerationError(f"unknown vocabulary profile {self.vocabulary!r}")
        if not (1 <= self.element_count <= len(ELEMENT_NAMES)):
            raise GenerationError(
                f"element_count must be 1..{len(ELEMENT_NAMES)}, got {self.element_count}"
            )
        if self.claims_count < 1:
            raise GenerationError("claims_count must be at least 1")
        if self.figures_count < 0:
            raise GenerationError("figures_count cannot be negative")
        if self.figures_count > self.element_count:
            raise GenerationError("each figure needs at least one element")
        if self.figures_count > 0 and SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS not in self.sections:
            raise GenerationError("figures requested without a drawings-description section")
        if self.template_sentences > 0 and SectionKind.DETAILED_EMBODIMENTS not in self.sections:
            raise GenerationError("template sentences are appended to detailed embodiments")
        for low, high in (self.background_sentences, self.invention_filler, self.embodiment_filler):
            if low < 0 or high < low:
                raise GenerationError("sentence count ranges must satisfy 0 <= low <= high")


@dataclass(frozen=True)
class Element:
    name: str
    numeral: str
    figure: Optional[str] = None  # figure number this element is drawn in


@dataclass
class GenerationTrace:
    """What the generator committed to: the oracle for parser/segmentation tests."""

    elements: list[Element] = field(default_factory=list)
    sentences_by_section: dict[str, list[str]] = field(default_factory=dict)
    template_texts: list[str] = field(default_factory=list)


def _partition(elements: list[Element], figures: int) -> list[list[Element]]:
    chunks: list[list[Element]] = [[] for _ in range(figures)]
    for i, element in enumerate(elements):
        chunks[i % figures].append(element)
    return chunks


def generate_synthetic_patent(
    params: GenerationParams,
) -> tuple[PatentDocument, GenerationTrace]:
    params.validate()
    rng = random.Random(params.seed)
    trace = GenerationTrace()

    names = list(ELEMENT_NAMES)
    rng.shuffle(names)
    elements = [
        Element(name=names[i], numeral=str(10 + 2 * i)) for i in range(params.element_count)
    ]

    figure_numbers = [str(i + 1) for i in range(params.figures_count)]
    if params.figures_count > 0:
        chunks = _partition(elements, params.figures_count)
        assigned: list[Element] = []
        for number, chunk in zip(figure_numbers, chunks):
            assigned.extend(replace(e, figure=number) for e in chunk)
        elements = sorted(assigned, key=lambda e: int(e.numeral))
    trace.elements = list(elements)

    ipc = params.ipc_class or rng.choice(list(IpcClass))
    patent_type = params.patent_type or rng.choice(list(PatentType))
    doc_id = params.doc_id or f"syn-{params.seed:06d}"

    e = elements
    title = f"Apparatus having a {e[0].name} and a {e[1].name}" if len(e) > 1 else (
        f"Apparatus having a {e[0].name}"
    )

    abstract_elements = e[: min(3, len(e))]
    listed = ", ".join(f"a {x.name}" for x in abstract_elements[:-1])
    if len(abstract_elements) > 1:
        enumeration = f"{listed}, and a {abstract_elements[-1].name}"
    else:
        enumeration = f"a {abstract_elements[0].name}"
    abstract = (
        f"A device is disclosed that includes {enumeration}. "
        f"The {abstract_elements[-1].name} is arranged relative to the "
        f"{abstract_elements[0].name} so that wear is reduced during operation. "
        "The arrangement simplifies assembly and maintenance."
    )

    sections: list[Section] = []
    for kind in params.sections:
        texts = _section_sentences(kind, params, rng, elements, figure_numbers)
        if kind is SectionKind.DETAILED_EMBODIMENTS and params.template_sentences > 0:
            for _ in range(params.template_sentences):
                texts.append(TEMPLATE_SENTENCE)
                trace.template_texts.append(TEMPLATE_SENTENCE)
        section = Section(kind=kind, raw_text=" ".join(texts))
        section.sentences = segment_sentences(section)
        sections.append(section)
        trace.sentences_by_section[section.key] = texts

    claims = _build_claims(params, rng, elements)

    manifest = None
    if params.figures_count > 0:
        entries = []
        for number in figure_numbers:
            members = [x for x in elements if x.figure == number]
            entries.append(
                FigureEntry(
                    figure_label=f"Fig. {number}",
                    visible_numerals=tuple(x.numeral for x in members),
                    depicted_elements=tuple((x.numeral, x.name) for x in members),
                )
            )
        manifest = FigureManifest(entries=entries)

    doc = PatentDocument(
        doc_id=doc_id,
        title=title,
        abstract=abstract,
        patent_type=patent_type,
        ipc_class=ipc,
        source=params.source,
        sections=sections,
        claims=claims,
        figure_manifest=manifest,
    )
    doc.validate()
    return doc, trace


def _section_sentences(
    kind: SectionKind,
    params: GenerationParams,
    rng: random.Random,
    elements: list[Element],
    figure_numbers: list[str],
) -> list[str]:
    if kind is SectionKind.TECHNICAL_FIELD:
        domain = rng.choice(FIELD_DOMAINS)
        return [
            f"The present device relates to {domain} equipment.",
            "In particular, it concerns compact transmission arrangements.",
        ]

    if kind is SectionKind.BACKGROUND:
        count = rng.randint(*params.background_sentences)
        count = max(1, count)
        pool = list(BACKGROUND_POOL)
        rng.shuffle(pool)
        return pool[:count] if count <= len(pool) else pool

    if kind is SectionKind.INVENTION_CONTENT:
        texts = [_enumeration_sentence(elements)]
        for first, second in zip(elements, elements[1:]):
            texts.append(
                f"The {first.name} {first.numeral} is arranged to "
                f"{rng.choice(VERBS_BASE)} the {second.name} {second.numeral}."
            )
        filler = rng.randint(*params.invention_filler)
        pool = list(INVENTION_FILLER_POOL)
        rng.shuffle(pool)
        texts.extend(pool[:filler])
        return texts

    if kind is SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS:
        if not figure_numbers:
            return [NO_FIGURES_SENTENCE]
        texts = []
        for number in figure_numbers:
            members = [x for x in elements if x.figure == number]
            listing = _the_enumeration(members)
            texts.append(f"Fig. {number} is a schematic view showing {listing}.")
        return texts

    if kind is SectionKind.DETAILED_EMBODIMENTS:
        texts: list[str] = []
        if figure_numbers:
            for number in figure_numbers:
                members = [x for x in elements if x.figure == number]
                first = members[0]
                if len(members) == 1:
                    texts.append(
                        f"As shown in Fig. {number}, the {first.name} {first.numeral} "
                        "is mounted within the assembly."
                    )
                else:
                    second = members[1]
                    texts.append(
                        f"As shown in Fig. {number}, the {first.name} {first.numeral} "
                        f"{rng.choice(VERBS_3P)} the {second.name} {second.numeral}."
                    )
                    for left, right in zip(members[1:], members[2:]):
                        texts.append(
                            f"The {left.name} {left.numeral} is coupled to the "
                            f"{right.name} {right.numeral} (Fig. {number})."
                        )
        else:
            for left, right in zip(elements, elements[1:]):
                texts.append(
                    f"The {left.name} {left.numeral} is secured against the "
                    f"{right.name} {right.numeral}."
                )
            if len(elements) == 1:
                only = elements[0]
                texts.append(
                    f"The {only.name} {only.numeral} is mounted within the assembly."
                )
        filler = rng.randint(*params.embodiment_filler)
        pool = list(EMBODIMENT_FILLER_POOL)
        rng.shuffle(pool)
        texts.extend(pool[:filler])
        return texts

    return ["Additional structural details are illustrated schematically."]


def _enumeration_sentence(elements: list[Element]) -> str:
    return f"The device comprises {_a_enumeration(elements)}."


def _a_enumeration(elements: list[Element]) -> str:
    parts = [f"a {x.name} {x.numeral}" for x in elements]
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + f", and {parts[-1]}"


def _the_enumeration(elements: list[Element]) -> str:
    parts = [f"the {x.name} {x.numeral}" for x in elements]
    if len(parts) == 1:
        return parts[0]
    return ", ".join(parts[:-1]) + f", and {parts[-1]}"


def _build_claims(
    params: GenerationParams, rng: random.Random, elements: list[Element]
) -> list[Claim]:
    names = [x.name for x in elements]
    listed = ", ".join(f"a {n}" for n in names[:-1])
    if len(names) > 1:
        enumeration = f"{listed}, and a {names[-1]}"
        tail = f"wherein the {names[1]} is arranged to engage the {names[0]}"
    else:
        enumeration = f"a {names[0]}"
        tail = f"wherein the {names[0]} is mounted within the device"
    claims = [Claim(number=1, text=f"A device comprising {enumeration}, {tail}.")]
    for number in range(2, params.claims_count + 1):
        depends_on = rng.randint(1, number - 1)
        left, right = rng.sample(names, 2) if len(names) > 1 else (names[0], names[0])
        claims.append(
            Claim(
                number=number,
                text=(
                    f"The device of claim {depends_on}, wherein the {left} is "
                    f"configured to {rng.choice(VERBS_BASE)} the {right}."
                ),
                depends_on=depends_on,
            )
        )
    return claims


def generate_corpus(
    count: int, base_seed: int = 0, **overrides
) -> list[tuple[PatentDocument, GenerationTrace]]:
    """Generate ``count`` documents with derived seeds; overrides apply to all."""
    out = []
    for i in range(count):
        params = GenerationParams(seed=base_seed + i, **overrides)
        out.append(generate_synthetic_patent(params))
    return out
