"""Reference-numeral conventions: element mentions, figure citations, terminology map.

An element mention is the "element-name numeral" pattern used in drawings-backed
specifications ("the drive shaft 14"). The element name is the one or two
non-stopword alphabetic tokens immediately before a standalone integer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from patentqa.model import PatentDocument, Sentence

# Words that never form part of an element name and that disqualify the token
# right before a numeral ("claim 1", "Fig. 2", "of 120").
MENTION_STOPWORDS = frozenset(
    """
    the a an of to in on at by with and or for as is are be been was were from than then
    that this these those it its least about approximately over under between each any
    fig figs figure figures claim claims no nos number numbers example examples
    embodiment embodiments step steps version section paragraph page wherein according
    shown least said such has have having comprises comprising includes including
    """.split()
)

_TOKEN_RE = re.compile(r"[A-Za-z]+(?:['-][A-Za-z]+)*|\d+(?:\.\d+)?")

FIGURE_REF_RE = re.compile(r"\bfig(?:ure)?s?\.?\s*(\d+)\b", re.IGNORECASE)


def tokenize_with_spans(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(0), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class ElementMention:
    name: str
    numeral: str
    span: tuple[int, int]  # covers "name ... numeral" within the scanned text


def element_mentions(text: str) -> list[ElementMention]:
    tokens = tokenize_with_spans(text)
    mentions: list[ElementMention] = []
    for i, (tok, start, end) in enumerate(tokens):
        if not tok.isdigit():
            continue
        if i == 0:
            continue
        w1, w1_start, _ = tokens[i - 1]
        if not w1.isalpha() or w1.lower() in MENTION_STOPWORDS:
            continue
        name = w1.lower()
        name_start = w1_start
        if i >= 2:
            w2, w2_start, _ = tokens[i - 2]
            if w2.isalpha() and w2.lower() not in MENTION_STOPWORDS:
                name = f"{w2.lower()} {name}"
                name_start = w2_start
        mentions.append(ElementMention(name=name, numeral=tok, span=(name_start, end)))
    return mentions


def figure_citations(text: str) -> list[tuple[str, tuple[int, int]]]:
    """All figure numbers cited in ``text`` with their character spans."""
    return [(m.group(1), (m.start(), m.end())) for m in FIGURE_REF_RE.finditer(text)]


def figure_label(number: str) -> str:
    return f"Fig. {number}"


def figure_number_from_label(label: str) -> Optional[str]:
    m = FIGURE_REF_RE.search(label)
    return m.group(1) if m else None


def canonical_name(name: str, canonical_terms: dict[str, str]) -> str:
    name = name.lower().strip()
    return canonical_terms.get(name, name)


@dataclass(frozen=True)
class MentionOccurrence:
    sentence: Sentence
    mention: ElementMention

    @property
    def section_span(self) -> tuple[int, int]:
        offset = self.sentence.char_span[0]
        return (offset + self.mention.span[0], offset + self.mention.span[1])


@dataclass
class TerminologyMap:
    """Document-wide name/numeral co-occurrence index with majority bindings.

    The canonical name for a numeral (and numeral for a name) is the most
    frequent binding; frequency ties break lexicographically so the outcome
    does not depend on sentence order.
    """

    occurrences: list[MentionOccurrence] = field(default_factory=list)
    by_numeral: dict[str, dict[str, list[MentionOccurrence]]] = field(default_factory=dict)
    by_name: dict[str, dict[str, list[MentionOccurrence]]] = field(default_factory=dict)

    def add(self, occ: MentionOccurrence, canonical_terms: dict[str, str]) -> None:
        name = canonical_name(occ.mention.name, canonical_terms)
        numeral = occ.mention.numeral
        self.occurrences.append(occ)
        self.by_numeral.setdefault(numeral, {}).setdefault(name, []).append(occ)
        self.by_name.setdefault(name, {}).setdefault(numeral, []).append(occ)

    @staticmethod
    def _majority(bindings: dict[str, list[MentionOccurrence]]) -> str:
        return min(bindings, key=lambda k: (-len(bindings[k]), k))

    def canonical_name_for(self, numeral: str) -> Optional[str]:
        bindings = self.by_numeral.get(numeral)
        return self._majority(bindings) if bindings else None

    def canonical_numeral_for(self, name: str) -> Optional[str]:
        bindings = self.by_name.get(name)
        return self._majority(bindings) if bindings else None

    def deviant_occurrences(self) -> list[tuple[MentionOccurrence, str, str]]:
        """Minority-binding mentions as (occurrence, conflict_kind, canonical_value).

        conflict_kind is "numeral" when the numeral's majority name differs,
        "name" when the name's majority numeral differs.
        """
        deviants: list[tuple[MentionOccurrence, str, str]] = []
        for numeral in sorted(self.by_numeral):
            bindings = self.by_numeral[numeral]
            if len(bindings) < 2:
                continue
            majority = self._majority(bindings)
            for name in sorted(bindings):
                if name != majority:
                    for occ in bindings[name]:
                        deviants.append((occ, "numeral", majority))
        for name in sorted(self.by_name):
            bindings = self.by_name[name]
            if len(bindings) < 2:
                continue
            majority = self._majority(bindings)
            for numeral in sorted(bindings, key=lambda x: (len(x), x)):
                if numeral != majority:
                    for occ in bindings[numeral]:
                        deviants.append((occ, "name", majority))
        return deviants


def build_terminology_map(
    live_sentences: Iterable[Sentence], canonical_terms: dict[str, str] | None = None
) -> TerminologyMap:
    terms = canonical_terms or {}
    tmap = TerminologyMap()
    for sentence in live_sentences:
        for mention in element_mentions(sentence.text):
            tmap.add(MentionOccurrence(sentence=sentence, mention=mention), terms)
    return tmap
