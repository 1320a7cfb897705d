"""Name normalization and the string similarity measures the matcher draws from.

Five label-level measures spanning edit-, n-gram- and token-based families,
all scored in [0, 1]. Degenerate inputs follow one convention throughout:
two empty names score 1.0, an empty name against a non-empty one scores 0.0.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache


class OracleLimitExceeded(ValueError):
    """Raised when the reference edit-distance oracle is asked for strings beyond its cap."""


class Measure(str, Enum):
    """Identifiers for the similarity measures available to the stochastic kernel.

    The enum values are the canonical lowercase names used in CLI flags and
    report files.
    """

    LEVENSHTEIN = "levenshtein"
    JARO_WINKLER = "jaro-winkler"
    BIGRAM_DICE = "bigram-dice"
    TRIGRAM_JACCARD = "trigram-jaccard"
    MONGE_ELKAN = "monge-elkan"

    @classmethod
    def from_name(cls, name: str) -> "Measure":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown measure {name!r} (expected one of: {valid})") from None


ALL_MEASURES: frozenset[Measure] = frozenset(Measure)

# Canonical iteration order for anything that must be deterministic.
MEASURE_ORDER: tuple[Measure, ...] = tuple(sorted(Measure, key=lambda m: m.value))


@dataclass(frozen=True)
class TokenizedName:
    """A schema element label split into lowercase tokens, original preserved."""

    original: str
    tokens: tuple[str, ...]

    @property
    def joined(self) -> str:
        """All tokens concatenated: the separator- and case-free view of the name."""
        return "".join(self.tokens)


_SEPARATORS = re.compile(r"[_\-. ]+")
_BOUNDARIES = re.compile(
    r"(?<=[a-z])(?=[A-Z])"          # camelCase
    r"|(?<=[A-Z])(?=[A-Z][a-z])"    # acronym followed by a word: XMLTag -> XML, Tag
    r"|(?<=[A-Za-z])(?=[0-9])"      # letter/digit
    r"|(?<=[0-9])(?=[A-Za-z])"      # digit/letter
)


def normalize(name: str) -> TokenizedName:
    """Split a raw element name into lowercase tokens.

    Splits on underscore, hyphen, dot and space, then on camelCase and
    letter/digit boundaries. Token order is preserved; empty input yields an
    empty token list.
    """
    tokens: list[str] = []
    for chunk in _SEPARATORS.split(name):
        for part in _BOUNDARIES.split(chunk):
            if part:
                tokens.append(part.lower())
    return TokenizedName(original=name, tokens=tuple(tokens))


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute), iterative two-row DP."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


_ORACLE_CAP = 64


def levenshtein_oracle(a: str, b: str) -> int:
    """Plain recursive-with-memo edit distance, for validating `levenshtein`.

    Deliberately naive; refuses strings longer than 64 characters.
    """
    if len(a) > _ORACLE_CAP or len(b) > _ORACLE_CAP:
        raise OracleLimitExceeded(
            f"oracle accepts strings up to {_ORACLE_CAP} chars, got {len(a)} and {len(b)}"
        )
    memo: dict[tuple[int, int], int] = {}

    def dist(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        key = (i, j)
        if key not in memo:
            if a[i - 1] == b[j - 1]:
                sub = dist(i - 1, j - 1)
            else:
                sub = dist(i - 1, j - 1) + 1
            memo[key] = min(dist(i - 1, j) + 1, dist(i, j - 1) + 1, sub)
        return memo[key]

    return dist(len(a), len(b))


def levenshtein_similarity(a: str, b: str) -> float:
    """1 - distance/max(len): 1.0 for two empty strings."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def _jaro(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(len(a), len(b)) // 2 - 1
    if window < 0:
        window = 0
    a_flags = [False] * len(a)
    b_flags = [False] * len(b)
    matches = 0
    for i, ch in enumerate(a):
        lo = max(0, i - window)
        hi = min(len(b), i + window + 1)
        for j in range(lo, hi):
            if not b_flags[j] and b[j] == ch:
                a_flags[i] = b_flags[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    k = 0
    for i, flagged in enumerate(a_flags):
        if not flagged:
            continue
        while not b_flags[k]:
            k += 1
        if a[i] != b[k]:
            transpositions += 1
        k += 1
    t = transpositions / 2
    m = matches
    return (m / len(a) + m / len(b) + (m - t) / m) / 3


_WINKLER_SCALING = 0.1
_WINKLER_PREFIX_CAP = 4


def jaro_winkler(a: str, b: str) -> float:
    """Jaro score boosted by the shared-prefix bonus (scaling 0.1, prefix cap 4)."""
    jaro = _jaro(a, b)
    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix == _WINKLER_PREFIX_CAP:
            break
        prefix += 1
    return jaro + prefix * _WINKLER_SCALING * (1.0 - jaro)


def _ngrams(s: str, n: int) -> Counter:
    return Counter(s[i:i + n] for i in range(len(s) - n + 1))


def _ngram_dice(a: str, b: str, n: int) -> float:
    grams_a = _ngrams(a, n)
    grams_b = _ngrams(b, n)
    total = sum(grams_a.values()) + sum(grams_b.values())
    if total == 0:
        return 1.0
    shared = sum((grams_a & grams_b).values())
    return 2.0 * shared / total


def _ngram_jaccard(a: str, b: str, n: int) -> float:
    grams_a = _ngrams(a, n)
    grams_b = _ngrams(b, n)
    union = sum((grams_a | grams_b).values())
    if union == 0:
        return 1.0
    shared = sum((grams_a & grams_b).values())
    return shared / union


def monge_elkan(a: TokenizedName, b: TokenizedName) -> float:
    """Mean over tokens of `a` of the best Levenshtein similarity among tokens of `b`.

    Asymmetric by construction; the two token lists play different roles.
    """
    if not a.tokens and not b.tokens:
        return 1.0
    if not a.tokens or not b.tokens:
        return 0.0
    total = 0.0
    for ta in a.tokens:
        total += max(levenshtein_similarity(ta, tb) for tb in b.tokens)
    return total / len(a.tokens)


@lru_cache(maxsize=None)
def score(measure: Measure, a: TokenizedName, b: TokenizedName) -> float:
    """Score two normalized names with one measure; always in [0, 1].

    The character-based measures operate on the joined token strings, so
    separator and case differences never count against a pair.
    """
    if measure is Measure.LEVENSHTEIN:
        return levenshtein_similarity(a.joined, b.joined)
    if measure is Measure.JARO_WINKLER:
        return jaro_winkler(a.joined, b.joined)
    if measure is Measure.BIGRAM_DICE:
        return _ngram_dice(a.joined, b.joined, 2)
    if measure is Measure.TRIGRAM_JACCARD:
        return _ngram_jaccard(a.joined, b.joined, 3)
    if measure is Measure.MONGE_ELKAN:
        return monge_elkan(a, b)
    raise ValueError(f"unhandled measure: {measure!r}")


def similarity(measure: Measure, a: str, b: str) -> float:
    """Convenience: normalize two raw names and score them."""
    return score(measure, normalize(a), normalize(b))
