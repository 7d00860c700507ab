"""Term lists driving the report perturbations.

The shipped default lexicon is a toolkit artifact (versioned in
data/default_lexicon.json): the 14-label chest pathology vocabulary,
left/right + basal/apical + upper/lower swap pairs, two severity ladders,
a small non-informative word set, and a five-sentence no-findings report.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from importlib import resources

from .errors import InputError

ENV_LEXICON = "VLSCORE_LEXICON"

_FIELDS = (
    "pathology_terms",
    "insignificant_phrases",
    "location_swaps",
    "severity_ladders",
    "noninformative_words",
    "normal_sentences",
)


def term_pattern(term: str) -> re.Pattern[str]:
    """Case-insensitive whole-word (or whole-phrase) matcher."""
    return re.compile(rf"(?<![a-z0-9]){re.escape(term)}(?![a-z0-9])", re.IGNORECASE)


@dataclass(frozen=True)
class Lexicon:
    pathology_terms: frozenset[str]
    insignificant_phrases: frozenset[str]
    location_swaps: tuple[tuple[str, str], ...]
    severity_ladders: tuple[tuple[str, ...], ...]
    noninformative_words: frozenset[str]
    normal_sentences: tuple[str, ...]

    def __post_init__(self) -> None:
        lowercase_only = (
            list(self.pathology_terms)
            + list(self.insignificant_phrases)
            + [w for pair in self.location_swaps for w in pair]
            + [w for ladder in self.severity_ladders for w in ladder]
            + list(self.noninformative_words)
        )
        for entry in lowercase_only:
            if not entry or entry != entry.lower():
                raise InputError(f"lexicon entries must be nonempty lowercase, got {entry!r}")
        seen: set[str] = set()
        for pair in self.location_swaps:
            if len(pair) != 2 or pair[0] == pair[1]:
                raise InputError(f"location swap {pair!r} must be two distinct words")
            for word in pair:
                if word in seen:
                    raise InputError(f"location swap word {word!r} appears in two pairs")
                seen.add(word)
        for ladder in self.severity_ladders:
            if len(ladder) < 3:
                raise InputError(f"severity ladder {ladder!r} needs at least 3 rungs")
            if len(set(ladder)) != len(ladder):
                raise InputError(f"severity ladder {ladder!r} repeats a rung")
        for sentence in self.normal_sentences:
            for term in self.pathology_terms:
                if term_pattern(term).search(sentence):
                    raise InputError(
                        f"normal sentence {sentence!r} contains pathology term {term!r}"
                    )

    def contains_pathology(self, text: str) -> bool:
        return any(term_pattern(term).search(text) for term in self.pathology_terms)


def lexicon_from_obj(obj: object, where: str = "lexicon") -> Lexicon:
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object")
    missing = [f for f in _FIELDS if f not in obj and not (f == "severity_ladders" and "severity_ladder" in obj)]
    if missing:
        raise InputError(f"{where}: missing fields {missing}")
    ladders = obj.get("severity_ladders", obj.get("severity_ladder"))
    if ladders and isinstance(ladders[0], str):
        ladders = [ladders]  # accept a single flat ladder
    try:
        return Lexicon(
            pathology_terms=frozenset(obj["pathology_terms"]),
            insignificant_phrases=frozenset(obj["insignificant_phrases"]),
            location_swaps=tuple(tuple(pair) for pair in obj["location_swaps"]),
            severity_ladders=tuple(tuple(ladder) for ladder in ladders),
            noninformative_words=frozenset(obj["noninformative_words"]),
            normal_sentences=tuple(obj["normal_sentences"]),
        )
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: malformed lexicon ({exc})") from None


def load_lexicon(path: str | os.PathLike[str]) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON ({exc.msg})") from None
    return lexicon_from_obj(obj, where=str(path))


def default_lexicon() -> Lexicon:
    raw = resources.files("vlscore").joinpath("data/default_lexicon.json").read_text("utf-8")
    return lexicon_from_obj(json.loads(raw), where="default lexicon")


def resolve_lexicon(path: str | os.PathLike[str] | None) -> Lexicon:
    """Explicit path, else $VLSCORE_LEXICON, else the packaged default."""
    if path is not None:
        return load_lexicon(path)
    env = os.environ.get(ENV_LEXICON)
    if env:
        return load_lexicon(env)
    return default_lexicon()
