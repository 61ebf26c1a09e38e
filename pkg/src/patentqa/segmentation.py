"""Deterministic sentence segmentation and template-sentence filtering.

The rule set is small and fixed so that segmentation is reproducible:

* a sentence ends at ``.``, ``!`` or ``?`` followed by whitespace or end of text;
* a ``.`` between two digits never splits (decimal numbers);
* a ``.`` after a known abbreviation or a single letter never splits
  ("Fig.", "No.", "e.g.", initials);
* a ``.`` after a bare integer at the start of a segment or right after
  ``:``/``;``/newline never splits (enumerated lists);
* trailing text without a terminator forms a final sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Pattern

from patentqa.model import Section, SectionKind, Sentence

ABBREVIATIONS = frozenset(
    {"fig", "figs", "no", "nos", "eg", "ie", "etc", "vs", "al", "cf", "approx", "pat", "ser"}
)

_TERMINATORS = ".!?"


def _trailing_word(text: str, end: int) -> str:
    i = end
    while i > 0 and text[i - 1].isalpha():
        i -= 1
    return text[i:end]


def _trailing_integer(text: str, end: int) -> Optional[int]:
    i = end
    while i > 0 and text[i - 1].isdigit():
        i -= 1
    if i == end:
        return None
    return i


def _is_enumerator(text: str, digits_start: int, segment_start: int) -> bool:
    if digits_start == segment_start:
        return True
    j = digits_start - 1
    while j >= segment_start and text[j] in " \t":
        j -= 1
    return j >= 0 and text[j] in ":;\n"


def segment_spans(text: str) -> list[tuple[int, int]]:
    """Split ``text`` into sentence spans; spans are trimmed of surrounding whitespace."""
    spans: list[tuple[int, int]] = []
    n = len(text)
    i = 0

    def _skip_ws(pos: int) -> int:
        while pos < n and text[pos].isspace():
            pos += 1
        return pos

    start = _skip_ws(0)
    i = start
    while i < n:
        ch = text[i]
        # Requiring whitespace after the terminator already keeps decimal points
        # ("1.5 MPa") and glued references ("Fig.1") inside one sentence.
        if ch in _TERMINATORS and (i + 1 == n or text[i + 1].isspace()):
            split = True
            if ch == ".":
                word = _trailing_word(text, i)
                if word and (len(word) == 1 or word.lower() in ABBREVIATIONS):
                    split = False
                digits_start = _trailing_integer(text, i)
                if digits_start is not None and _is_enumerator(text, digits_start, start):
                    split = False
            if split:
                if i + 1 > start:
                    spans.append((start, i + 1))
                start = _skip_ws(i + 1)
                i = start
                continue
        i += 1

    if start < n:
        end = n
        while end > start and text[end - 1].isspace():
            end -= 1
        if end > start:
            spans.append((start, end))
    return spans


def segment_sentences(section: Section) -> list[Sentence]:
    """Segment a section into sentences with document-unique ids."""
    sentences: list[Sentence] = []
    for ordinal, (start, end) in enumerate(segment_spans(section.raw_text)):
        sentences.append(
            Sentence(
                sentence_id=f"{section.key}:{ordinal:04d}",
                section_kind=section.kind,
                section_label=section.label,
                ordinal=ordinal,
                text=section.raw_text[start:end],
                char_span=(start, end),
            )
        )
    return sentences


@dataclass(frozen=True)
class TemplatePatterns:
    """Boilerplate matchers: literal prefixes plus compiled regular patterns."""

    literal_prefixes: tuple[str, ...] = ()
    regexes: tuple[Pattern[str], ...] = ()

    def matches(self, text: str) -> bool:
        stripped = text.strip()
        lowered = stripped.lower()
        for prefix in self.literal_prefixes:
            if lowered.startswith(prefix.lower()):
                return True
        return any(rx.search(stripped) for rx in self.regexes)


def compile_template_patterns(
    literal_prefixes: Iterable[str], regexes: Iterable[str]
) -> TemplatePatterns:
    # re.error here is converted to a configuration error by the profile loader.
    return TemplatePatterns(
        literal_prefixes=tuple(literal_prefixes),
        regexes=tuple(re.compile(rx) for rx in regexes),
    )


def split_templates(
    sentences: Iterable[Sentence], patterns: TemplatePatterns
) -> tuple[list[Sentence], list[Sentence]]:
    """Partition sentences into (live, template); template copies carry is_template=True."""
    live: list[Sentence] = []
    flagged: list[Sentence] = []
    for s in sentences:
        if patterns.matches(s.text):
            flagged.append(replace(s, is_template=True))
        else:
            live.append(s)
    return live, flagged


def filter_template_sentences(
    sentences: Iterable[Sentence], patterns: TemplatePatterns
) -> list[Sentence]:
    """Drop template sentences; input sentence objects are not modified."""
    return split_templates(sentences, patterns)[0]
