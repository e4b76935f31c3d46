"""Line-level text similarity used to score clone candidates.

A line is reduced to its set of adjacent character pairs (bigrams over
Unicode scalar values, case-sensitive). Two lines are compared with the
Dice coefficient over those sets, and a multi-line fragment is scored as
the length-weighted average of its per-line Dice values, with weights
taken from the query side.

Everything here is pure and deterministic. These functions are the
semantic reference for the vectorized kernels in :mod:`iccheck.kernels`;
the kernels are required to reproduce these float results bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class LineBigramSet:
    """Bigram set of one normalized line plus the line's character count."""

    bigrams: frozenset[str]
    source_length: int


def normalize_line(raw: str) -> str:
    """Strip trailing whitespace (and any trailing CR); keep the rest.

    Leading whitespace and case are preserved: indentation is meaningful
    in formats like YAML and must contribute to similarity.
    """
    return raw.rstrip()


def bigrams(line: str) -> LineBigramSet:
    """Adjacent character pairs of a normalized line, with set semantics.

    Lines shorter than two characters yield an empty set. Pairs are over
    Unicode scalar values, never bytes, so scores are encoding-independent.
    """
    return LineBigramSet(
        frozenset(line[i : i + 2] for i in range(len(line) - 1)),
        len(line),
    )


def dice(a: LineBigramSet, b: LineBigramSet) -> float:
    """Dice coefficient 2|A∩B| / (|A|+|B|) of two bigram sets.

    Two empty sets compare as 1.0 (two blank lines are identical); an
    empty set against a non-empty one is 0.0.
    """
    total = len(a.bigrams) + len(b.bigrams)
    if total == 0:
        return 1.0
    return 2 * len(a.bigrams & b.bigrams) / total


def line_weight(query_line: str) -> int:
    """Averaging weight of one query line: its character count, floored at 1."""
    return max(len(query_line), 1)


def fragment_similarity(query: Sequence[str], candidate: Sequence[str]) -> float:
    """Weighted average of per-line Dice coefficients between two fragments.

    Lines are paired positionally; weights come from the query side, so a
    query's score does not depend on candidate padding and blank query
    lines cannot nullify the average. Not symmetric when line lengths
    differ between the two sides.

    Raises ValueError if the fragments differ in length or are empty.
    """
    if len(query) != len(candidate):
        raise ValueError(
            f"fragment length mismatch: {len(query)} query lines vs "
            f"{len(candidate)} candidate lines"
        )
    if not query:
        raise ValueError("fragments must contain at least one line")
    total = 0.0
    weight_sum = 0
    for q, c in zip(query, candidate):
        w = line_weight(q)
        total += w * dice(bigrams(q), bigrams(c))
        weight_sum += w
    return total / weight_sum
