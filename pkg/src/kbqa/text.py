"""String utilities shared by the scorers: charsets, LCS similarity,
longest-match tokenization and date normalization."""

from __future__ import annotations

import re
import unicodedata
from typing import Iterable, Protocol


def is_content_char(ch: str) -> bool:
    cat = unicodedata.category(ch)
    return not (cat.startswith("P") or cat.startswith("Z") or cat.startswith("C") or cat == "Sm")


def charset(text: str) -> set[str]:
    """Distinct characters of ``text`` ignoring punctuation and whitespace."""
    return {ch for ch in text if is_content_char(ch)}


def char_overlap(source: str, target: str) -> float:
    """Fraction of the distinct chars of ``source`` that also occur in ``target``."""
    chars = charset(source)
    if not chars:
        return 0.0
    return len(chars & charset(target)) / len(chars)


def lcs_length(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    row = [0] * (len(b) + 1)
    for ca in a:
        prev = 0
        for j, cb in enumerate(b):
            cur = row[j + 1]
            if ca == cb:
                row[j + 1] = prev + 1
            elif row[j] > cur:
                row[j + 1] = row[j]
            prev = cur
    return row[-1]


class SimilarityScorer(Protocol):
    name: str

    def score(self, text_a: str, text_b: str) -> float: ...


class LcsScorer:
    """LCS length divided by the length of the shorter string.

    A string contained (as a subsequence) in the other scores 1.
    """

    name = "lcs"

    def score(self, text_a: str, text_b: str) -> float:
        if not text_a or not text_b:
            return 1.0 if text_a == text_b and text_a else 0.0
        return lcs_length(text_a, text_b) / min(len(text_a), len(text_b))


class ConstantScorer:
    name = "constant"

    def __init__(self, value: float = 0.5):
        self.value = value

    def score(self, text_a: str, text_b: str) -> float:
        return self.value


SCORERS = {"lcs": LcsScorer, "constant": ConstantScorer}


# -- tokenization ----------------------------------------------------------

_ASCII_WORD = re.compile(r"[A-Za-z0-9]+")


class LongestMatchTokenizer:
    """Greedy left-to-right longest match over a vocabulary.

    ASCII alphanumeric runs form one token each; other characters are matched
    against vocabulary entries of length >= 2 and fall back to single chars.
    Punctuation and whitespace are dropped.
    """

    def __init__(self, vocabulary: Iterable[str] = ()):
        self.vocab = {w for w in vocabulary if len(w) >= 2}
        self.max_len = max((len(w) for w in self.vocab), default=0)

    def tokenize(self, text: str) -> list[str]:
        tokens: list[str] = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if not is_content_char(ch):
                i += 1
                continue
            match = None
            for length in range(min(self.max_len, n - i), 1, -1):
                if text[i:i + length] in self.vocab:
                    match = text[i:i + length]
                    break
            if match is None and ch.isascii() and ch.isalnum():
                match = _ASCII_WORD.match(text, i).group()
            if match is None:
                match = ch
            tokens.append(match)
            i += len(match)
        return tokens


# -- dates ----------------------------------------------------------------

_DATE = re.compile(
    r"(?<!\d)(\d{4})(?:年(\d{1,2})月(\d{1,2})日"
    r"|\.(\d{1,2})\.(\d{1,2})(?!\d)"
    r"|/(\d{1,2})/(\d{1,2})(?!\d)"
    r"|-(\d{1,2})-(\d{1,2})(?!\d))"
)


def _valid(month: int, day: int) -> bool:
    return 1 <= month <= 12 and 1 <= day <= 31


def normalize_date(text: str) -> str:
    """Rewrite ``YYYY年M月D日``, ``YYYY.M.D``, ``YYYY/M/D`` and ``YYYY-M-D``
    to zero-padded ``YYYY-MM-DD``. Out-of-range months or days are left as is."""

    def repl(m: re.Match) -> str:
        groups = [g for g in m.groups()[1:] if g is not None]
        month, day = int(groups[0]), int(groups[1])
        if not _valid(month, day):
            return m.group(0)
        return f"{m.group(1)}-{month:02d}-{day:02d}"

    return _DATE.sub(repl, text)


ISO_DATE = re.compile(r"(?<!\d)\d{4}-\d{2}-\d{2}(?!\d)")
