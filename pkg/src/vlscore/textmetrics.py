"""Native baseline text metrics over a shared canonical tokenizer.

These are sentence-level scores computed per report pair; table pipelines
average them afterwards. METEOR here is the exact-match "lite" variant (no
stemming or synonym resources), so its absolute values are not comparable to
resource-backed METEOR implementations.
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from typing import Sequence

from .errors import InputError

UNK_TOKEN = "[UNK]"

_PUNCT = ".,:;!?()"

# BLEU smoothing floor for zero n-gram precisions
_BLEU_EPSILON = 1e-9

# METEOR-lite parameters: recall-weighted harmonic mean and fragmentation penalty
_METEOR_ALPHA = 0.9
_METEOR_GAMMA = 0.5
_METEOR_BETA = 3


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokenization with punctuation split off the ends.

    Leading/trailing .,:;!?() become their own tokens; interior punctuation
    (decimals like "3.5") is kept. The literal token "[UNK]" passes through
    unchanged.
    """
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk if chunk == UNK_TOKEN else chunk.lower())
        tokens.extend(reversed(trail))
    return tokens


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[k : k + n]) for k in range(len(tokens) - n + 1))


def bleu(reference: Sequence[str], candidate: Sequence[str], max_n: int = 4) -> float:
    """Sentence BLEU: clipped n-gram precisions, geometric mean, brevity penalty.

    Uses the sentence-level effective-order convention: orders for which the
    candidate has no n-grams at all are left out of the geometric mean, so an
    identical short pair still scores 1. Zero precisions (n-grams exist but
    none match) are floored at epsilon.
    """
    if not 1 <= max_n:
        raise InputError(f"max_n must be >= 1, got {max_n}")
    if not candidate:
        warnings.warn("empty candidate; BLEU is 0", RuntimeWarning, stacklevel=2)
        return 0.0

    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            continue
        ref_counts = _ngram_counts(reference, n)
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        precision = clipped / total
        log_sum += math.log(precision if precision > 0.0 else _BLEU_EPSILON)
        orders += 1
    geometric_mean = math.exp(log_sum / orders)

    ref_len, cand_len = len(reference), len(candidate)
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return geometric_mean * brevity


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(b) > len(a):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for tok_a in a:
        current = [0]
        for j, tok_b in enumerate(b, start=1):
            if tok_a == tok_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(reference: Sequence[str], candidate: Sequence[str]) -> float:
    """LCS-based F1."""
    if not reference or not candidate:
        return 0.0
    lcs = _lcs_length(reference, candidate)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return 2.0 * precision * recall / (precision + recall)


def _align(reference: Sequence[str], candidate: Sequence[str]) -> list[tuple[int, int]]:
    """Greedy left-to-right one-to-one exact matching, preferring chunk continuation."""
    positions: dict[str, list[int]] = {}
    for idx, token in enumerate(reference):
        positions.setdefault(token, []).append(idx)
    used = [False] * len(reference)
    pairs: list[tuple[int, int]] = []
    for j, token in enumerate(candidate):
        options = positions.get(token)
        if not options:
            continue
        pick = -1
        if pairs:
            prev_j, prev_p = pairs[-1]
            follow = prev_p + 1
            if (
                prev_j == j - 1
                and follow < len(reference)
                and not used[follow]
                and reference[follow] == token
            ):
                pick = follow
        if pick < 0:
            for p in options:
                if not used[p]:
                    pick = p
                    break
        if pick >= 0:
            used[pick] = True
            pairs.append((j, pick))
    return pairs


def _chunk_count(pairs: Sequence[tuple[int, int]]) -> int:
    chunks = 0
    prev = (-2, -2)
    for j, p in pairs:
        if j != prev[0] + 1 or p != prev[1] + 1:
            chunks += 1
        prev = (j, p)
    return chunks


def meteor_lite(reference: Sequence[str], candidate: Sequence[str]) -> float:
    """Exact-match METEOR: harmonic mean of P and R with a fragmentation penalty.

    A single contiguous alignment carries no fragmentation, so identical
    sequences score exactly 1.
    """
    if not reference or not candidate:
        return 0.0
    pairs = _align(reference, candidate)
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    f_mean = precision * recall / (_METEOR_ALPHA * precision + (1.0 - _METEOR_ALPHA) * recall)
    chunks = _chunk_count(pairs)
    penalty = 0.0 if chunks <= 1 else _METEOR_GAMMA * (chunks / matches) ** _METEOR_BETA
    return f_mean * (1.0 - penalty)
