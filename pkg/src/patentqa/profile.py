"""Jurisdiction profiles: mandatory sections, lexicons, format rules, template patterns."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from patentqa.errors import ConfigurationError
from patentqa.model import NAMED_SECTION_KINDS, SectionKind
from patentqa.segmentation import TemplatePatterns, compile_template_patterns

log = logging.getLogger("patentqa.profile")

_NAMED_KINDS = {k.value: k for k in NAMED_SECTION_KINDS}

_DEFAULTS = {
    "title_rules": {"max_chars": 180, "forbidden_leading": ["improved", "new", "novel"]},
    "abstract_rules": {"min_words": 10, "max_words": 250, "forbidden_leading": []},
    "figure_description_min_sentences": 1,
}

_KNOWN_FIELDS = {
    "profile_id",
    "version",
    "mandatory_sections",
    "prohibited_phrases",
    "lexicon_files",
    "terminology_canonicalization",
    "title_rules",
    "abstract_rules",
    "template_patterns",
    "wordlist_files",
    "figure_description_min_sentences",
    "vague_scope_phrases",
}


@dataclass(frozen=True)
class TitleRules:
    max_chars: int
    forbidden_leading: tuple[str, ...]


@dataclass(frozen=True)
class AbstractRules:
    min_words: int
    max_words: int
    forbidden_leading: tuple[str, ...]


@dataclass(frozen=True)
class LexiconEntry:
    phrase: str
    category: str = "prohibited_commercial_language"
    explanation: Optional[str] = None


@dataclass
class JurisdictionProfile:
    profile_id: str
    version: str
    mandatory_sections: tuple[SectionKind, ...]
    lexicon: tuple[LexiconEntry, ...]
    canonical_terms: dict[str, str]
    title_rules: TitleRules
    abstract_rules: AbstractRules
    template_patterns: TemplatePatterns
    wordlist: frozenset[str]
    vague_scope_phrases: tuple[str, ...]
    figure_description_min_sentences: int = 1
    lexicon_regex: Optional[re.Pattern[str]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.lexicon and self.lexicon_regex is None:
            # Longest-phrase-first alternation gives longest-match semantics.
            phrases = sorted({e.phrase for e in self.lexicon}, key=len, reverse=True)
            pattern = "|".join(re.escape(p) for p in phrases)
            self.lexicon_regex = re.compile(rf"\b(?:{pattern})\b", re.IGNORECASE)

    def lexicon_entry(self, phrase: str) -> Optional[LexiconEntry]:
        lowered = phrase.lower()
        for entry in self.lexicon:
            if entry.phrase.lower() == lowered:
                return entry
        return None


def _asset_root() -> Path:
    return Path(str(resources.files("patentqa").joinpath("assets")))


def _read_lines(path: Path) -> list[str]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read profile asset {path}: {e}") from e
    lines = []
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


def _resolve(base: Path, ref: str) -> Path:
    path = Path(ref)
    return path if path.is_absolute() else base / ref


def load_profile(path: str | Path | None = None) -> JurisdictionProfile:
    """Load and validate a profile file; ``None`` loads the packaged default."""
    if path is None:
        path = _asset_root() / "profiles" / "default.json"
    path = Path(path)
    base = path.parent

    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigurationError(f"cannot read profile {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"profile {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"profile {path} must be a JSON object")

    unknown = sorted(set(data) - _KNOWN_FIELDS)
    if unknown:
        raise ConfigurationError(f"unknown profile field(s): {', '.join(unknown)}")

    profile_id = data.get("profile_id", path.stem)
    version = str(data.get("version", "1"))

    mandatory: list[SectionKind] = []
    for value in data.get("mandatory_sections", []):
        kind = _NAMED_KINDS.get(value)
        if kind is None:
            raise ConfigurationError(
                f"mandatory section {value!r} is not one of the named section kinds"
            )
        mandatory.append(kind)

    lexicon: list[LexiconEntry] = []
    for i, raw_entry in enumerate(data.get("prohibited_phrases", [])):
        if isinstance(raw_entry, str):
            raw_entry = {"phrase": raw_entry}
        phrase = raw_entry.get("phrase", "")
        if not phrase or not phrase.strip():
            raise ConfigurationError(f"prohibited_phrases[{i}] has an empty phrase")
        lexicon.append(
            LexiconEntry(
                phrase=phrase.strip(),
                category=raw_entry.get("category", "prohibited_commercial_language"),
                explanation=raw_entry.get("explanation"),
            )
        )
    for ref in data.get("lexicon_files", []):
        for line in _read_lines(_resolve(base, ref)):
            if not line.strip():
                raise ConfigurationError(f"lexicon file {ref} contains an empty phrase")
            lexicon.append(LexiconEntry(phrase=line))
    if not lexicon:
        log.warning("profile %s ships an empty prohibited-phrase lexicon", profile_id)

    for key in ("title_rules", "abstract_rules"):
        if key not in data:
            log.info("profile %s: %s not set, using defaults", profile_id, key)
    title_raw = {**_DEFAULTS["title_rules"], **data.get("title_rules", {})}
    abstract_raw = {**_DEFAULTS["abstract_rules"], **data.get("abstract_rules", {})}
    title_rules = TitleRules(
        max_chars=int(title_raw["max_chars"]),
        forbidden_leading=tuple(title_raw["forbidden_leading"]),
    )
    abstract_rules = AbstractRules(
        min_words=int(abstract_raw["min_words"]),
        max_words=int(abstract_raw["max_words"]),
        forbidden_leading=tuple(abstract_raw["forbidden_leading"]),
    )

    patterns_raw = data.get("template_patterns", {})
    try:
        template_patterns = compile_template_patterns(
            patterns_raw.get("literal_prefixes", []), patterns_raw.get("regexes", [])
        )
    except re.error as e:
        raise ConfigurationError(f"invalid template pattern in profile {profile_id}: {e}") from e

    words: set[str] = set()
    for ref in data.get("wordlist_files", []):
        words.update(w.lower() for w in _read_lines(_resolve(base, ref)))

    profile = JurisdictionProfile(
        profile_id=profile_id,
        version=version,
        mandatory_sections=tuple(mandatory),
        lexicon=tuple(lexicon),
        canonical_terms={
            str(k).lower(): str(v).lower()
            for k, v in data.get("terminology_canonicalization", {}).items()
        },
        title_rules=title_rules,
        abstract_rules=abstract_rules,
        template_patterns=template_patterns,
        wordlist=frozenset(words),
        vague_scope_phrases=tuple(p.lower() for p in data.get("vague_scope_phrases", [])),
        figure_description_min_sentences=int(
            data.get("figure_description_min_sentences", _DEFAULTS["figure_description_min_sentences"])
        ),
    )
    return profile


_default_profile: JurisdictionProfile | None = None


def default_profile() -> JurisdictionProfile:
    global _default_profile
    if _default_profile is None:
        _default_profile = load_profile(None)
    return _default_profile
