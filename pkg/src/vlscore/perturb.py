"""Deterministic report perturbations: six modification types, one edit each.

Every operation is pure given (report, lexicon, seed). Suite generation
derives per-record seeds from the run seed and the study id, so output is
byte-identical regardless of scheduling.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .errors import InputError
from .lexicon import Lexicon, term_pattern
from .types import PerturbationKind, StudyRecord

_TERMINATORS = ".!?"

# words whose trailing period does not end a sentence
_ABBREVIATIONS = {
    "dr.", "mr.", "mrs.", "ms.", "st.",
    "a.m.", "p.m.", "e.g.", "i.e.", "etc.", "vs.", "no.", "fig.", "cf.",
}

EditSpan = tuple[int, tuple[int, int]]


@dataclass(frozen=True)
class PerturbationOutcome:
    original: str
    perturbed: str
    kind: PerturbationKind
    edit_span: EditSpan | None
    applied: bool


def split_sentences(report: str) -> list[str]:
    """Sentence chunks, each keeping its terminator and trailing whitespace.

    Lossless by construction: ``"".join(split_sentences(s)) == s``. Periods
    inside decimals never end a sentence (no following whitespace), and a
    short abbreviation list guards the rest.
    """
    sentences: list[str] = []
    n = len(report)
    start = 0
    i = 0
    while i < n:
        if report[i] in _TERMINATORS and (i + 1 == n or report[i + 1].isspace()):
            word_start = i
            while word_start > start and not report[word_start - 1].isspace():
                word_start -= 1
            if report[word_start : i + 1].lower() in _ABBREVIATIONS:
                i += 1
                continue
            end = i + 1
            while end < n and report[end].isspace():
                end += 1
            sentences.append(report[start:end])
            start = end
            i = end
        else:
            i += 1
    if start < n:
        sentences.append(report[start:])
    return sentences


def _not_applied(report: str, kind: PerturbationKind) -> PerturbationOutcome:
    return PerturbationOutcome(report, report, kind, None, False)


def _matches_any(text: str, terms) -> bool:
    return any(term_pattern(term).search(text) for term in terms)


def _token_index(sentence: str, offset: int) -> int:
    """Index of the whitespace token containing the given character offset."""
    before = len(sentence[:offset].split())
    if offset > 0 and not sentence[offset - 1].isspace():
        before -= 1
    return max(before, 0)


def _locate(report: str, char_pos: int) -> EditSpan:
    offset = 0
    sentences = split_sentences(report)
    for index, sentence in enumerate(sentences):
        if char_pos < offset + len(sentence) or index == len(sentences) - 1:
            within = char_pos - offset
            token = _token_index(sentence, within)
            return (index, (token, token + 1))
        offset += len(sentence)
    return (0, (0, 0))


def _remove_sentence(
    report: str, eligible: list[int], seed: int, kind: PerturbationKind
) -> PerturbationOutcome:
    if not eligible:
        return _not_applied(report, kind)
    sentences = split_sentences(report)
    index = eligible[random.Random(seed).randrange(len(eligible))]
    perturbed = "".join(sentences[:index] + sentences[index + 1 :])
    span = (index, (0, len(sentences[index].split())))
    return PerturbationOutcome(report, perturbed, kind, span, True)


def remove_pathology_sentence(report: str, lex: Lexicon, seed: int) -> PerturbationOutcome:
    """Delete one sentence that mentions a pathology."""
    eligible = [
        i for i, s in enumerate(split_sentences(report)) if _matches_any(s, lex.pathology_terms)
    ]
    return _remove_sentence(report, eligible, seed, PerturbationKind.REMOVE_PATHOLOGY_SENTENCE)


def remove_insignificant_sentence(report: str, lex: Lexicon, seed: int) -> PerturbationOutcome:
    """Delete one general sentence with no clinical content."""
    eligible = [
        i
        for i, s in enumerate(split_sentences(report))
        if any(phrase in s.lower() for phrase in lex.insignificant_phrases)
        and not _matches_any(s, lex.pathology_terms)
    ]
    return _remove_sentence(report, eligible, seed, PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE)


def _substitute(
    report: str,
    occurrences: list[tuple[int, int, str]],
    seed: int,
    kind: PerturbationKind,
) -> PerturbationOutcome:
    if not occurrences:
        return _not_applied(report, kind)
    start, end, replacement = occurrences[random.Random(seed).randrange(len(occurrences))]
    perturbed = report[:start] + replacement + report[end:]
    return PerturbationOutcome(report, perturbed, kind, _locate(report, start), True)


def swap_location_word(report: str, lex: Lexicon, seed: int) -> PerturbationOutcome:
    """Replace one occurrence of a location word with its paired opposite."""
    occurrences: list[tuple[int, int, str]] = []
    for one, other in lex.location_swaps:
        for word, partner in ((one, other), (other, one)):
            for match in term_pattern(word).finditer(report):
                occurrences.append((match.start(), match.end(), partner))
    occurrences.sort()
    return _substitute(report, occurrences, seed, PerturbationKind.SWAP_LOCATION)


def _severity_target(ladder: tuple[str, ...], rung: int, rng: random.Random) -> str:
    far = [j for j in range(len(ladder)) if abs(j - rung) >= 2]
    if not far:
        best = max(abs(j - rung) for j in range(len(ladder)) if j != rung)
        far = [j for j in range(len(ladder)) if j != rung and abs(j - rung) == best]
    return ladder[far[rng.randrange(len(far))]]


def swap_severity_word(report: str, lex: Lexicon, seed: int) -> PerturbationOutcome:
    """Move one severity term at least two rungs along its ladder when possible."""
    occurrences: list[tuple[int, int, str, int]] = []
    claimed: set[str] = set()
    for ladder in lex.severity_ladders:
        for rung, term in enumerate(ladder):
            if term in claimed:
                continue  # a term listed in two ladders swaps along the first
            for match in term_pattern(term).finditer(report):
                occurrences.append((match.start(), match.end(), term, rung))
        claimed.update(ladder)
    occurrences.sort()
    if not occurrences:
        return _not_applied(report, PerturbationKind.SWAP_SEVERITY)
    rng = random.Random(seed)
    start, end, term, rung = occurrences[rng.randrange(len(occurrences))]
    ladder = next(l for l in lex.severity_ladders if term in l)
    replacement = _severity_target(ladder, rung, rng)
    perturbed = report[:start] + replacement + report[end:]
    return PerturbationOutcome(
        report, perturbed, PerturbationKind.SWAP_SEVERITY, _locate(report, start), True
    )


def mask_noninformative_word(report: str, lex: Lexicon, seed: int) -> PerturbationOutcome:
    """Replace one non-informative word with the literal [UNK] token."""
    occurrences: list[tuple[int, int, str]] = []
    for word in sorted(lex.noninformative_words):
        for match in term_pattern(word).finditer(report):
            occurrences.append((match.start(), match.end(), "[UNK]"))
    occurrences.sort()
    return _substitute(report, occurrences, seed, PerturbationKind.MASK_NONINFORMATIVE)


def build_normal_report(lex: Lexicon) -> str:
    """The standardized no-findings report: the configured sentences, in order."""
    if not lex.normal_sentences:
        raise InputError("lexicon has no normal_sentences to build a no-findings report")
    return " ".join(lex.normal_sentences)


_OPS = {
    PerturbationKind.REMOVE_PATHOLOGY_SENTENCE: remove_pathology_sentence,
    PerturbationKind.REMOVE_INSIGNIFICANT_SENTENCE: remove_insignificant_sentence,
    PerturbationKind.SWAP_LOCATION: swap_location_word,
    PerturbationKind.SWAP_SEVERITY: swap_severity_word,
    PerturbationKind.MASK_NONINFORMATIVE: mask_noninformative_word,
}


@dataclass
class PerturbationSuite:
    records: list[StudyRecord] = field(default_factory=list)
    counts: dict[PerturbationKind, int] = field(
        default_factory=lambda: {kind: 0 for kind in PerturbationKind}
    )


def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


def record_seed(run_seed: int, study_id: str) -> int:
    return run_seed ^ _stable_hash(study_id)


def generate_suite(
    records: list[StudyRecord], lex: Lexicon, seed: int
) -> PerturbationSuite:
    """Apply all applicable perturbations to every record's reference report.

    Each successful application becomes one output record whose candidate is
    the perturbed text; the no-findings substitution is attempted only for
    references free of pathology terms. A run with zero applications is legal.
    """
    suite = PerturbationSuite()
    for record in records:
        seed_for_record = record_seed(seed, record.study_id)
        outcomes = [op(record.reference_text, lex, seed_for_record) for op in _OPS.values()]
        if lex.normal_sentences and not lex.contains_pathology(record.reference_text):
            normal = build_normal_report(lex)
            outcomes.append(
                PerturbationOutcome(
                    record.reference_text,
                    normal,
                    PerturbationKind.NORMAL_REPORT_SUBSTITUTION,
                    None,
                    True,
                )
            )
        for outcome in outcomes:
            if not outcome.applied:
                continue
            suite.counts[outcome.kind] += 1
            suite.records.append(
                StudyRecord(
                    study_id=f"{record.study_id}::{outcome.kind.value}",
                    image_id=record.image_id,
                    reference_text=record.reference_text,
                    candidate_text=outcome.perturbed,
                    perturbation=outcome.kind,
                    split=record.split,
                )
            )
    return suite
