"""Defect injection with an exact ground-truth log.

Each injection mutates one target (a sentence, a manifest entry, a document
field) and records the finding the rule detectors must recover: kind, severity,
and exact location. Mutations never change sentence boundaries, so sentence ids
stay stable and the log remains valid against the mutated document.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from patentqa.annotations import DocumentLabels
from patentqa.coherence import RISK_TO_SEVERITY, load_risk_catalog
from patentqa.errors import InjectionError
from patentqa.findings import Location, Module, Severity, category_catalog
from patentqa.generator import INJECTION_NAME_POOL
from patentqa.model import (
    Claim,
    FigureEntry,
    FigureManifest,
    PatentDocument,
    Section,
    SectionKind,
)
from patentqa.numerals import FIGURE_REF_RE, build_terminology_map, element_mentions
from patentqa.profile import JurisdictionProfile, default_profile
from patentqa.segmentation import segment_sentences, split_templates

GROUND_TRUTH_SCHEMA = "patentqa.ground_truth/1"

# Marketing phrases safe to splice into a sentence (subset of the default lexicon
# that is maximal under longest-match and grammatical after "a ... advantage").
INJECTABLE_PHRASES = (
    "revolutionary breakthrough",
    "world-leading",
    "unprecedented performance",
    "flawless",
    "market-dominating",
    "groundbreaking innovation",
)

COMPLIANCE_KINDS = (
    "prohibited_commercial_language",
    "inconsistent_terminology",
    "missing_mandatory_section",
    "improper_title_abstract_format",
    "orthographic_error",
    "insufficient_figure_description",
)
COHERENCE_KINDS = (
    "high_inconsistent_labels",
    "high_missing_figures",
    "med_insufficient_claim_support",
    "med_imprecise_field_scope",
    "low_typo",
    "low_minor_formatting",
)
FIGURE_KINDS = (
    "missing_numeral_in_figure",
    "unreferenced_numeral_in_figure",
    "mismatched_description",
    "nonexistent_figure_reference",
)
ALL_KINDS = COMPLIANCE_KINDS + COHERENCE_KINDS + FIGURE_KINDS

# Document-level kinds run before manifest kinds, which run before sentence kinds.
_PHASE = {}
for _k in ("missing_mandatory_section", "improper_title_abstract_format", "high_missing_figures"):
    _PHASE[_k] = 0
for _k in ("missing_numeral_in_figure", "unreferenced_numeral_in_figure", "mismatched_description"):
    _PHASE[_k] = 1
for _k in ALL_KINDS:
    _PHASE.setdefault(_k, 2)

_CONTENT_SECTIONS = (
    SectionKind.TECHNICAL_FIELD,
    SectionKind.BACKGROUND,
    SectionKind.INVENTION_CONTENT,
    SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
    SectionKind.DETAILED_EMBODIMENTS,
)


def kind_signature(kind: str) -> tuple[Module, str, Severity]:
    """(module, finding category, expected severity) for one defect kind."""
    if kind in COMPLIANCE_KINDS or kind in FIGURE_KINDS:
        spec = category_catalog()[kind]
        return spec.module, kind, spec.severity
    if kind in COHERENCE_KINDS:
        criterion = load_risk_catalog().by_id(kind)
        if criterion is None:
            raise InjectionError(f"coherence criterion {kind!r} is not in the catalog")
        return Module.COHERENCE, kind, RISK_TO_SEVERITY[criterion.level]
    raise InjectionError(f"unknown defect kind {kind!r}")


@dataclass(frozen=True)
class InjectionItem:
    kind: str
    count: int = 1
    section: Optional[str] = None
    sentence_range: Optional[tuple[int, int]] = None
    variant: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise InjectionError(f"unknown defect kind {self.kind!r}")
        if self.count < 1:
            raise InjectionError(f"count must be positive for kind {self.kind!r}")


@dataclass
class InjectionSpec:
    items: list[InjectionItem] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict) -> "InjectionSpec":
        items = []
        for raw in data.get("items", []):
            items.append(
                InjectionItem(
                    kind=raw["kind"],
                    count=int(raw.get("count", 1)),
                    section=raw.get("section"),
                    sentence_range=(
                        tuple(raw["sentence_range"]) if raw.get("sentence_range") else None
                    ),
                    variant=raw.get("variant"),
                )
            )
        return cls(items=items)

    @classmethod
    def load(cls, path: str | Path) -> "InjectionSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as e:
            raise InjectionError(f"cannot load injection spec {path}: {e}") from e


@dataclass
class GroundTruthEntry:
    kind: str
    module: Module
    category: str
    expected_severity: Severity
    location: Location
    pre_text: str
    post_text: str
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "module": self.module.value,
            "category": self.category,
            "expected_severity": self.expected_severity.value,
            "location": self.location.to_dict(),
            "pre_text": self.pre_text,
            "post_text": self.post_text,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthEntry":
        return cls(
            kind=data["kind"],
            module=Module(data["module"]),
            category=data["category"],
            expected_severity=Severity(data["expected_severity"]),
            location=Location.from_dict(data["location"]),
            pre_text=data["pre_text"],
            post_text=data["post_text"],
            detail=dict(data.get("detail", {})),
        )


@dataclass
class GroundTruthLog:
    doc_id: str
    seed: int
    entries: list[GroundTruthEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema": GROUND_TRUTH_SCHEMA,
            "doc_id": self.doc_id,
            "seed": self.seed,
            "entries": [e.to_dict() for e in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruthLog":
        log = cls(doc_id=data["doc_id"], seed=data["seed"])
        log.entries = [GroundTruthEntry.from_dict(e) for e in data.get("entries", [])]
        return log

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "GroundTruthLog":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_annotations(
        self, doc: PatentDocument, profile: JurisdictionProfile | None = None
    ) -> DocumentLabels:
        """Gold labels for the mutated document: logged defects, everything else clean.

        Document-scope entries have no per-sentence label and are skipped here;
        they remain in the log for direct detector-versus-log certification.
        """
        profile = profile or default_profile()
        live, _ = split_templates(doc.sentences(), profile.template_patterns)
        labels = DocumentLabels(doc_id=doc.doc_id)
        for sentence in live:
            labels.compliance[sentence.sentence_id] = "compliant"
            labels.risk[sentence.sentence_id] = "safe"
        if doc.figure_manifest is not None:
            for label in doc.figure_manifest.labels():
                labels.figure_pairs[label] = "consistent"
        for entry in self.entries:
            sid = entry.location.sentence_id
            if entry.module is Module.COMPLIANCE and sid is not None:
                labels.compliance[sid] = entry.category
            elif entry.module is Module.COHERENCE and sid is not None:
                severity = entry.expected_severity.value
                current = labels.risk.get(sid, "safe")
                order = {"safe": 0, "low": 1, "medium": 2, "high": 3}
                if order[severity] > order.get(current, 0):
                    labels.risk[sid] = severity
            elif entry.module is Module.FIGURE_CONSISTENCY and entry.location.figure_label:
                labels.figure_pairs[entry.location.figure_label] = "inconsistent"
        return labels


@dataclass
class _SectionState:
    kind: SectionKind
    label: Optional[str]
    prefix: str
    gaps: list[str]
    suffix: str
    texts: list[str]
    template_flags: list[bool]

    @property
    def key(self) -> str:
        if self.kind is SectionKind.OTHER:
            return f"other:{self.label}"
        return self.kind.value

    def raw_text(self) -> str:
        parts = [self.prefix]
        for i, text in enumerate(self.texts):
            if i > 0:
                parts.append(self.gaps[i - 1])
            parts.append(text)
        parts.append(self.suffix)
        return "".join(parts)


@dataclass
class _FigureState:
    figure_label: str
    visible: list[str]
    depicted: Optional[list[tuple[str, str]]]
    image_path: Optional[str]


class _Builder:
    def __init__(self, doc: PatentDocument, profile: JurisdictionProfile):
        self.doc_id = doc.doc_id
        self.title = doc.title
        self.abstract = doc.abstract
        self.patent_type = doc.patent_type
        self.ipc_class = doc.ipc_class
        self.source = doc.source
        self.claims: list[Claim] = list(doc.claims)
        self.sections: list[_SectionState] = []
        for section in doc.sections:
            spans = [s.char_span for s in section.sentences]
            texts = [s.text for s in section.sentences]
            prefix = section.raw_text[: spans[0][0]] if spans else section.raw_text
            gaps = [
                section.raw_text[spans[i][1] : spans[i + 1][0]] for i in range(len(spans) - 1)
            ]
            suffix = section.raw_text[spans[-1][1] :] if spans else ""
            flags = [profile.template_patterns.matches(t) for t in texts]
            self.sections.append(
                _SectionState(
                    kind=section.kind,
                    label=section.label,
                    prefix=prefix,
                    gaps=gaps,
                    suffix=suffix,
                    texts=texts,
                    template_flags=flags,
                )
            )
        self.manifest: Optional[list[_FigureState]] = None
        if doc.figure_manifest is not None:
            self.manifest = [
                _FigureState(
                    figure_label=e.figure_label,
                    visible=list(e.visible_numerals),
                    depicted=list(e.depicted_elements) if e.depicted_elements else None,
                    image_path=e.image_path,
                )
                for e in doc.figure_manifest.entries
            ]

    def section_state(self, kind: SectionKind) -> Optional[_SectionState]:
        for state in self.sections:
            if state.kind is kind:
                return state
        return None

    def build(self) -> PatentDocument:
        sections = []
        for state in self.sections:
            section = Section(kind=state.kind, raw_text=state.raw_text(), label=state.label)
            section.sentences = segment_sentences(section)
            if len(section.sentences) != len(state.texts):
                raise InjectionError(
                    f"injection changed sentence boundaries in section {state.key}"
                )
            for sentence, text in zip(section.sentences, state.texts):
                if sentence.text != text:
                    raise InjectionError(
                        f"injection changed sentence boundaries in section {state.key}"
                    )
            sections.append(section)
        manifest = None
        if self.manifest is not None:
            manifest = FigureManifest(
                entries=[
                    FigureEntry(
                        figure_label=f.figure_label,
                        visible_numerals=tuple(
                            sorted(f.visible, key=lambda n: (int(n) if n.isdigit() else 0, n))
                        ),
                        depicted_elements=tuple(f.depicted) if f.depicted else None,
                        image_path=f.image_path,
                    )
                    for f in self.manifest
                ]
            )
        doc = PatentDocument(
            doc_id=self.doc_id,
            title=self.title,
            abstract=self.abstract,
            patent_type=self.patent_type,
            ipc_class=self.ipc_class,
            source=self.source,
            sections=sections,
            claims=self.claims,
            figure_manifest=manifest,
        )
        doc.validate()
        return doc


@dataclass
class _PendingEntry:
    kind: str
    section_key: Optional[str]
    ordinal: Optional[int]
    rel_span: Optional[tuple[int, int]]
    location: Optional[Location]  # set directly for non-sentence scopes
    pre_text: str
    post_text: str
    detail: dict


class _Injector:
    def __init__(self, doc: PatentDocument, seed: int, profile: JurisdictionProfile):
        self.profile = profile
        self.rng = random.Random(seed)
        self.builder = _Builder(doc, profile)
        self.pending: list[_PendingEntry] = []
        self.used_sentences: set[tuple[str, int]] = set()
        self.used_figures: set[str] = set()
        self.used_doc_fields: set[str] = set()
        self.used_names: set[str] = set()
        self.used_numerals: set[str] = set()
        self.fresh_numeral = 90

        live, _ = split_templates(doc.sentences(), profile.template_patterns)
        self.terminology = build_terminology_map(live, profile.canonical_terms)
        self.claims_text = " ".join(c.text.lower() for c in doc.claims)
        self.element_names = set(self.terminology.by_name)
        for numeral in self.terminology.by_numeral:
            self.used_numerals.add(numeral)

    # ---- candidate helpers -------------------------------------------------

    def _next_numeral(self) -> str:
        while str(self.fresh_numeral) in self.used_numerals:
            self.fresh_numeral += 1
        numeral = str(self.fresh_numeral)
        self.used_numerals.add(numeral)
        return numeral

    def _pick_name(self) -> str:
        pool = [n for n in INJECTION_NAME_POOL if n not in self.used_names and n not in self.element_names]
        if not pool:
            raise InjectionError("injection name pool exhausted for this document")
        name = self.rng.choice(pool)
        self.used_names.add(name)
        return name

    def _eligible_sentences(
        self,
        item: InjectionItem,
        kinds: tuple[SectionKind, ...] = _CONTENT_SECTIONS,
        predicate=None,
    ) -> list[tuple[_SectionState, int]]:
        out = []
        for state in self.builder.sections:
            if state.kind not in kinds:
                continue
            if item.section is not None and state.key != item.section:
                continue
            for ordinal, text in enumerate(state.texts):
                if state.template_flags[ordinal]:
                    continue
                if (state.key, ordinal) in self.used_sentences:
                    continue
                if item.sentence_range is not None:
                    low, high = item.sentence_range
                    if not (low <= ordinal <= high):
                        continue
                if predicate is not None and not predicate(state, ordinal, text):
                    continue
                out.append((state, ordinal))
        return out

    def _take(self, candidates, kind: str):
        if not candidates:
            raise InjectionError(f"no eligible target for defect kind {kind!r}")
        return self.rng.choice(candidates)

    def _replace_sentence(self, state: _SectionState, ordinal: int, new_text: str) -> str:
        old = state.texts[ordinal]
        state.texts[ordinal] = new_text
        self.used_sentences.add((state.key, ordinal))
        return old

    # ---- kind handlers -----------------------------------------------------

    def apply(self, item: InjectionItem) -> None:
        handler = getattr(self, f"_inject_{item.kind}", None)
        if handler is None:
            raise InjectionError(f"unknown defect kind {item.kind!r}")
        handler(item)

    def _inject_prohibited_commercial_language(self, item: InjectionItem) -> None:
        candidates = self._eligible_sentences(
            item, predicate=lambda s, o, t: t.endswith(".") and "," not in t[-2:]
        )
        state, ordinal = self._take(candidates, item.kind)
        phrase = self.rng.choice(INJECTABLE_PHRASES)
        old = state.texts[ordinal]
        new = f"{old[:-1]}, providing a {phrase} advantage."
        self._replace_sentence(state, ordinal, new)
        pos = new.rfind(phrase)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=(pos, pos + len(phrase)),
                location=None,
                pre_text=old,
                post_text=new,
                detail={"phrase": phrase},
            )
        )

    def _rename_element(self, item: InjectionItem, kind: str) -> None:
        allowed = (SectionKind.INVENTION_CONTENT, SectionKind.DETAILED_EMBODIMENTS)
        options = []
        for name in sorted(self.terminology.by_name):
            bindings = self.terminology.by_name[name]
            occurrences = [occ for occs in bindings.values() for occ in occs]
            if len(occurrences) < 3 or name in self.used_names:
                continue
            for occ in occurrences:
                s = occ.sentence
                if s.section_kind not in allowed:
                    continue
                state = self.builder.section_state(s.section_kind)
                if state is None:
                    continue
                if item.section is not None and state.key != item.section:
                    continue
                if (state.key, s.ordinal) in self.used_sentences:
                    continue
                if item.sentence_range is not None:
                    low, high = item.sentence_range
                    if not (low <= s.ordinal <= high):
                        continue
                options.append((name, occ, state))
        if not options:
            raise InjectionError(f"no eligible target for defect kind {kind!r}")
        name, occ, state = self.rng.choice(options)
        self.used_names.add(name)
        new_name = self._pick_name()
        numeral = occ.mention.numeral
        old = state.texts[occ.sentence.ordinal]
        needle = f"{name} {numeral}"
        if old.count(needle) != 1:
            raise InjectionError(f"cannot locate mention {needle!r} uniquely")
        new = old.replace(needle, f"{new_name} {numeral}", 1)
        self._replace_sentence(state, occ.sentence.ordinal, new)
        pos = new.find(f"{new_name} {numeral}")
        self.pending.append(
            _PendingEntry(
                kind=kind,
                section_key=state.key,
                ordinal=occ.sentence.ordinal,
                rel_span=(pos, pos + len(f"{new_name} {numeral}")),
                location=None,
                pre_text=old,
                post_text=new,
                detail={"numeral": numeral, "canonical": name, "deviant": new_name},
            )
        )

    def _inject_inconsistent_terminology(self, item: InjectionItem) -> None:
        self._rename_element(item, "inconsistent_terminology")

    def _inject_high_inconsistent_labels(self, item: InjectionItem) -> None:
        self._rename_element(item, "high_inconsistent_labels")

    def _inject_missing_mandatory_section(self, item: InjectionItem) -> None:
        deletable = (SectionKind.TECHNICAL_FIELD, SectionKind.BACKGROUND)
        candidates = [
            state
            for state in self.builder.sections
            if state.kind in deletable
            and (item.section is None or state.key == item.section)
            and state.kind in self.profile.mandatory_sections
        ]
        state = self._take(candidates, item.kind)
        self.builder.sections.remove(state)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(scope="document", section_kind=state.kind),
                pre_text=state.raw_text(),
                post_text="",
                detail={"section": state.kind.value},
            )
        )

    def _inject_improper_title_abstract_format(self, item: InjectionItem) -> None:
        variants = [v for v in ("title", "abstract") if v not in self.used_doc_fields]
        if item.variant is not None:
            variants = [v for v in variants if v == item.variant]
        if not variants:
            raise InjectionError("title and abstract are already mutated")
        variant = self.rng.choice(variants)
        self.used_doc_fields.add(variant)
        if variant == "title":
            old = self.builder.title
            self.builder.title = f"Improved {old}"
            new = self.builder.title
        else:
            old = self.builder.abstract
            self.builder.abstract = "A compact device."
            new = self.builder.abstract
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(scope="document", doc_field=variant),
                pre_text=old,
                post_text=new,
                detail={"field": variant},
            )
        )

    def _typo_defect(self, item: InjectionItem, kind: str) -> None:
        wordlist = self.profile.wordlist

        def has_typo_target(state, ordinal, text):
            return bool(self._typo_candidates(text))

        candidates = self._eligible_sentences(item, predicate=has_typo_target)
        state, ordinal = self._take(candidates, kind)
        old = state.texts[ordinal]
        words = self._typo_candidates(old)
        token, start, end = self.rng.choice(words)
        corrupted = self._corrupt(token, wordlist)
        if corrupted is None:
            raise InjectionError(f"could not corrupt token {token!r} out of the wordlist")
        new = old[:start] + corrupted + old[end:]
        self._replace_sentence(state, ordinal, new)
        self.pending.append(
            _PendingEntry(
                kind=kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=(start, start + len(corrupted)),
                location=None,
                pre_text=old,
                post_text=new,
                detail={"original": token, "corrupted": corrupted},
            )
        )

    def _typo_candidates(self, text: str) -> list[tuple[str, int, int]]:
        from patentqa.numerals import tokenize_with_spans

        tokens = tokenize_with_spans(text)
        out = []
        for i, (token, start, end) in enumerate(tokens):
            if not token.isalpha() or not token.islower() or len(token) < 5:
                continue
            if token in self.element_names or token in INJECTION_NAME_POOL:
                continue
            if i + 1 < len(tokens) and tokens[i + 1][0].isdigit():
                continue  # do not corrupt a word that binds a reference numeral
            out.append((token, start, end))
        return out

    def _corrupt(self, token: str, wordlist: frozenset[str]) -> Optional[str]:
        positions = list(range(1, len(token) - 1))
        self.rng.shuffle(positions)
        for i in positions:
            swapped = token[:i] + token[i + 1] + token[i] + token[i + 2 :]
            if swapped != token and swapped.lower() not in wordlist:
                return swapped
        return None

    def _inject_orthographic_error(self, item: InjectionItem) -> None:
        variant = item.variant
        if variant is None:
            variant = self.rng.choice(("typo", "doubled_punctuation"))
        if variant == "typo":
            self._typo_defect(item, "orthographic_error")
            return
        candidates = self._eligible_sentences(item, predicate=lambda s, o, t: "," in t)
        if not candidates:
            self._typo_defect(item, "orthographic_error")
            return
        state, ordinal = self._take(candidates, item.kind)
        old = state.texts[ordinal]
        pos = old.find(",")
        new = old[:pos] + ",," + old[pos + 1 :]
        self._replace_sentence(state, ordinal, new)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=(pos, pos + 2),
                location=None,
                pre_text=old,
                post_text=new,
                detail={"pattern": ",,"},
            )
        )

    def _inject_low_typo(self, item: InjectionItem) -> None:
        self._typo_defect(item, "low_typo")

    def _inject_low_minor_formatting(self, item: InjectionItem) -> None:
        variant = item.variant
        if variant is None:
            variant = self.rng.choice(("space_before_comma", "double_space"))
        if variant == "space_before_comma":
            candidates = self._eligible_sentences(item, predicate=lambda s, o, t: ", " in t)
            if not candidates:
                variant = "double_space"
        if variant == "double_space":
            candidates = self._eligible_sentences(item, predicate=lambda s, o, t: " " in t)
        state, ordinal = self._take(candidates, item.kind)
        old = state.texts[ordinal]
        if variant == "space_before_comma":
            pos = old.find(",")
            new = old[:pos] + " ," + old[pos + 1 :]
            span = (pos, pos + 2)
        else:
            pos = old.find(" ")
            new = old[:pos] + "  " + old[pos + 1 :]
            span = (pos, pos + 2)
        self._replace_sentence(state, ordinal, new)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=span,
                location=None,
                pre_text=old,
                post_text=new,
                detail={"variant": variant},
            )
        )

    def _inject_med_imprecise_field_scope(self, item: InjectionItem) -> None:
        candidates = self._eligible_sentences(
            item,
            kinds=(SectionKind.TECHNICAL_FIELD,),
            predicate=lambda s, o, t: t.endswith("."),
        )
        state, ordinal = self._take(candidates, item.kind)
        old = state.texts[ordinal]
        new = f"{old[:-1]}, and the like."
        self._replace_sentence(state, ordinal, new)
        pos = new.lower().find("and the like")
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=(pos, pos + len("and the like")),
                location=None,
                pre_text=old,
                post_text=new,
                detail={"phrase": "and the like"},
            )
        )

    def _inject_med_insufficient_claim_support(self, item: InjectionItem) -> None:
        candidates = self._eligible_sentences(
            item,
            kinds=(SectionKind.INVENTION_CONTENT,),
            predicate=lambda s, o, t: t.endswith(".") and not FIGURE_REF_RE.search(t),
        )
        state, ordinal = self._take(candidates, item.kind)
        name = self._pick_name()
        numeral = self._next_numeral()
        old = state.texts[ordinal]
        new = f"{old[:-1]}, which is adjacent to the {name} {numeral}."
        self._replace_sentence(state, ordinal, new)
        needle = f"{name} {numeral}"
        pos = new.find(needle)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=(pos, pos + len(needle)),
                location=None,
                pre_text=old,
                post_text=new,
                detail={"element": name, "numeral": numeral},
            )
        )

    def _inject_high_missing_figures(self, item: InjectionItem) -> None:
        if self.builder.manifest is None or not self.builder.manifest:
            raise InjectionError("document has no figure manifest to remove")
        if self.used_figures:
            raise InjectionError("manifest removal conflicts with figure-level injections")
        cites_figures = any(
            FIGURE_REF_RE.search(text) for s in self.builder.sections for text in s.texts
        )
        if not cites_figures:
            raise InjectionError("text never cites a figure; removal would be undetectable")
        self.used_figures.update(f.figure_label for f in self.builder.manifest)
        self.builder.manifest = None
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(scope="document"),
                pre_text="<figure manifest>",
                post_text="",
                detail={},
            )
        )

    def _inject_insufficient_figure_description(self, item: InjectionItem) -> None:
        figure, state, ordinal = self._descriptive_sentence_target(item, require_comention=True)
        old = state.texts[ordinal]
        new = "Additional structural details are illustrated schematically."
        self._replace_sentence(state, ordinal, new)
        self.used_figures.add(figure.figure_label)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(
                    scope="figure",
                    section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
                    figure_label=figure.figure_label,
                ),
                pre_text=old,
                post_text=new,
                detail={"figure_label": figure.figure_label},
            )
        )

    def _descriptive_sentence_target(self, item: InjectionItem, require_comention: bool = False):
        """(figure, drawings state, ordinal) for a figure whose sole description cites it."""
        if self.builder.manifest is None:
            raise InjectionError("document has no figure manifest")
        state = self.builder.section_state(SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS)
        if state is None:
            raise InjectionError("document has no drawings-description section")
        options = []
        for figure in self.builder.manifest:
            if figure.figure_label in self.used_figures:
                continue
            number = _figure_number(figure.figure_label)
            matches = [
                ordinal
                for ordinal, text in enumerate(state.texts)
                if not state.template_flags[ordinal]
                and (state.key, ordinal) not in self.used_sentences
                and number in {m.group(1) for m in FIGURE_REF_RE.finditer(text)}
            ]
            if len(matches) != 1:
                continue
            if require_comention and not self._fully_comentioned(figure, state, matches[0]):
                continue
            options.append((figure, state, matches[0]))
        if not options:
            raise InjectionError(f"no eligible figure for defect kind {item.kind!r}")
        return self.rng.choice(options)

    def _fully_comentioned(
        self, figure: _FigureState, drawings: _SectionState, skip_ordinal: int
    ) -> bool:
        """Every manifest numeral of the figure is tied to it outside one sentence.

        Required before dropping a description sentence: the figure's expected
        numerals must survive through co-mentions, or the removal would fabricate
        missing/unreferenced defects beyond the logged one.
        """
        number = _figure_number(figure.figure_label)
        covered: set[str] = set()
        for state in self.builder.sections:
            for ordinal, text in enumerate(state.texts):
                if state is drawings and ordinal == skip_ordinal:
                    continue
                if number not in {m.group(1) for m in FIGURE_REF_RE.finditer(text)}:
                    continue
                covered.update(m.numeral for m in element_mentions(text))
        return set(figure.visible) <= covered

    def _figure_target(self, item: InjectionItem, predicate=None) -> _FigureState:
        if self.builder.manifest is None:
            raise InjectionError("document has no figure manifest")
        options = [
            f
            for f in self.builder.manifest
            if f.figure_label not in self.used_figures and (predicate is None or predicate(f))
        ]
        if not options:
            raise InjectionError(f"no eligible figure for defect kind {item.kind!r}")
        figure = self.rng.choice(options)
        self.used_figures.add(figure.figure_label)
        return figure

    def _inject_missing_numeral_in_figure(self, item: InjectionItem) -> None:
        figure = self._figure_target(item, predicate=lambda f: len(f.visible) >= 2)
        numeral = self.rng.choice(sorted(figure.visible, key=int))
        figure.visible.remove(numeral)
        if figure.depicted:
            figure.depicted = [(n, name) for n, name in figure.depicted if n != numeral]
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(
                    scope="figure",
                    section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
                    figure_label=figure.figure_label,
                ),
                pre_text=numeral,
                post_text="",
                detail={"numeral": numeral},
            )
        )

    def _inject_unreferenced_numeral_in_figure(self, item: InjectionItem) -> None:
        figure = self._figure_target(item)
        numeral = self._next_numeral()
        figure.visible.append(numeral)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(
                    scope="figure",
                    section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
                    figure_label=figure.figure_label,
                ),
                pre_text="",
                post_text=numeral,
                detail={"numeral": numeral},
            )
        )

    def _inject_mismatched_description(self, item: InjectionItem) -> None:
        figure = self._figure_target(item, predicate=lambda f: bool(f.depicted))
        index = self.rng.randrange(len(figure.depicted))
        numeral, old_name = figure.depicted[index]
        new_name = self._pick_name()
        figure.depicted[index] = (numeral, new_name)
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=None,
                ordinal=None,
                rel_span=None,
                location=Location(
                    scope="figure",
                    section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
                    figure_label=figure.figure_label,
                ),
                pre_text=old_name,
                post_text=new_name,
                detail={"numeral": numeral, "depicted": new_name, "textual": old_name},
            )
        )

    def _inject_nonexistent_figure_reference(self, item: InjectionItem) -> None:
        figure, state, ordinal = self._descriptive_sentence_target(item)
        number = _figure_number(figure.figure_label)
        phantom = str(max(int(_figure_number(f.figure_label)) for f in self.builder.manifest) + 7)
        old = state.texts[ordinal]
        lead = f"Fig. {number} "
        if not old.startswith(lead):
            raise InjectionError(f"description sentence for {figure.figure_label} has no label prefix")
        new = f"Fig. {number}, in conjunction with Fig. {phantom}, {old[len(lead):]}"
        self._replace_sentence(state, ordinal, new)
        pos = new.find(f"Fig. {phantom}")
        self.pending.append(
            _PendingEntry(
                kind=item.kind,
                section_key=state.key,
                ordinal=ordinal,
                rel_span=(pos, pos + len(f"Fig. {phantom}")),
                location=Location(
                    scope="figure",
                    section_kind=SectionKind.BRIEF_DESCRIPTION_OF_DRAWINGS,
                    figure_label=figure.figure_label,
                ),
                pre_text=old,
                post_text=new,
                detail={"missing_label": f"Fig. {phantom}", "figure_label": figure.figure_label},
            )
        )
        self.used_figures.add(figure.figure_label)


def _figure_number(label: str) -> str:
    m = FIGURE_REF_RE.search(label)
    if m is None:
        raise InjectionError(f"figure label {label!r} carries no number")
    return m.group(1)


def inject(
    doc: PatentDocument,
    spec: InjectionSpec,
    seed: int,
    profile: JurisdictionProfile | None = None,
) -> tuple[PatentDocument, GroundTruthLog]:
    """Apply the spec to a certified-clean document; returns (mutated, log)."""
    profile = profile or default_profile()
    injector = _Injector(doc, seed, profile)

    expanded: list[tuple[int, InjectionItem]] = []
    for index, item in enumerate(spec.items):
        for _ in range(item.count):
            expanded.append((index, item))
    expanded.sort(key=lambda pair: (_PHASE[pair[1].kind], pair[0]))

    failures: list[str] = []
    for _, item in expanded:
        try:
            injector.apply(item)
        except InjectionError as e:
            failures.append(f"{item.kind}: {e}")
    if failures:
        raise InjectionError(
            f"unsatisfiable injection spec for {doc.doc_id}: " + "; ".join(failures)
        )

    mutated = injector.builder.build()
    log = GroundTruthLog(doc_id=mutated.doc_id, seed=seed)
    key_index = {}
    for section in mutated.sections:
        for s in section.sentences:
            key_index[(section.key, s.ordinal)] = s

    for pending in injector.pending:
        module, category, severity = kind_signature(pending.kind)
        if pending.location is not None and pending.section_key is None:
            location = pending.location
        else:
            sentence = key_index[(pending.section_key, pending.ordinal)]
            offset = sentence.char_span[0]
            span = (
                (offset + pending.rel_span[0], offset + pending.rel_span[1])
                if pending.rel_span
                else None
            )
            base = pending.location
            if base is not None:  # figure-scoped entry anchored to a sentence
                location = Location(
                    scope=base.scope,
                    section_kind=base.section_kind,
                    section_label=base.section_label,
                    sentence_id=sentence.sentence_id,
                    figure_label=base.figure_label,
                    span=span,
                    doc_field=base.doc_field,
                )
            else:
                location = Location(
                    scope="sentence",
                    section_kind=sentence.section_kind,
                    section_label=sentence.section_label,
                    sentence_id=sentence.sentence_id,
                    span=span,
                )
        log.entries.append(
            GroundTruthEntry(
                kind=pending.kind,
                module=module,
                category=category,
                expected_severity=severity,
                location=location,
                pre_text=pending.pre_text,
                post_text=pending.post_text,
                detail=pending.detail,
            )
        )
    return mutated, log
