"""Topic-entity scoring: seven raw features, min-max normalization, weighted sum."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .candidates import LinkedCandidate
from .store import KnowledgeStore
from .text import LongestMatchTokenizer, SimilarityScorer, char_overlap

logger = logging.getLogger(__name__)

FEATURES = ("s1", "s2", "s3", "s4", "s5", "s6", "s7")

DEFAULT_LABEL_BONUS = {
    "nr": 1.0, "PER": 1.0, "DICT_FIN": 1.0,
    "nt": 0.8, "ORG": 0.8, "ns": 0.8, "LOC": 0.8, "nw": 0.8,
    "TIME": 0.6, "n": 0.3, "DICT_STOP": 0.1,
}


class NoTopicEntityError(LookupError):
    pass


@dataclass(frozen=True)
class EntityScoreVector:
    raw: tuple[float, ...]
    normalized: tuple[float, ...]
    total: float

    def as_dict(self) -> dict[str, dict[str, float]]:
        return {"raw": dict(zip(FEATURES, self.raw)),
                "normalized": dict(zip(FEATURES, self.normalized)),
                "total": self.total}


def score_length(candidate: LinkedCandidate) -> float:
    return float(len(candidate.mention))


def score_out_degree(candidate: LinkedCandidate, store: KnowledgeStore) -> float:
    return math.log1p(store.out_degree(candidate.entity))


def _interrogative_pattern(word: str) -> re.Pattern:
    if word.isascii():
        return re.compile(r"\b" + re.escape(word) + r"\b", re.IGNORECASE)
    return re.compile(re.escape(word))


def interrogative_positions(question: str, interrogatives: Sequence[str]) -> list[tuple[int, int]]:
    hits = []
    for word in interrogatives:
        hits.extend(m.span() for m in _interrogative_pattern(word).finditer(question))
    return sorted(hits)


def score_interrogative_proximity(candidate: LinkedCandidate, question: str,
                                  interrogatives: Sequence[str]) -> float:
    """Negated character gap to the nearest interrogative word."""
    hits = interrogative_positions(question, interrogatives)
    if not hits:
        return -float(len(question))
    start, end = candidate.span.start, candidate.span.end
    gap = min(max(0, a - end, start - b) for a, b in hits)
    return -float(gap)


def score_char_overlap(candidate: LinkedCandidate, question: str) -> float:
    return char_overlap(candidate.entity.value, question)


def score_word_overlap(candidate: LinkedCandidate, question: str, tokenizer: LongestMatchTokenizer) -> float:
    """Jaccard overlap of the mention+name token set against the question's."""
    a = set(tokenizer.tokenize(candidate.mention)) | set(tokenizer.tokenize(candidate.entity.value))
    b = set(tokenizer.tokenize(question))
    if not a | b:
        return 0.0
    return len(a & b) / len(a | b)


def score_label(candidate: LinkedCandidate, label_bonus: Mapping[str, float]) -> float:
    if candidate.label not in label_bonus:
        logger.warning("no label bonus configured for %r", candidate.label)
        return 0.0
    return float(label_bonus[candidate.label])


def score_similarity(candidate: LinkedCandidate, question: str, scorer: SimilarityScorer) -> float:
    return float(scorer.score(candidate.mention, question))


def raw_scores(candidate: LinkedCandidate, question: str, store: KnowledgeStore, *,
               interrogatives: Sequence[str], tokenizer: LongestMatchTokenizer,
               label_bonus: Mapping[str, float], scorer: SimilarityScorer) -> tuple[float, ...]:
    return (
        score_length(candidate),
        score_out_degree(candidate, store),
        score_interrogative_proximity(candidate, question, interrogatives),
        score_char_overlap(candidate, question),
        score_word_overlap(candidate, question, tokenizer),
        score_label(candidate, label_bonus),
        score_similarity(candidate, question, scorer),
    )


def min_max(values: Sequence[float]) -> list[float]:
    """Min-max rescale to [0, 1]; a constant column maps to 0.5.

    Computed in exact rational arithmetic so that an exact positive-affine
    transform of the inputs gives bit-identical outputs.
    """
    exact = [Fraction(v) for v in values]
    lo, hi = min(exact), max(exact)
    if lo == hi:
        return [0.5] * len(values)
    span = hi - lo
    return [float((v - lo) / span) for v in exact]


def normalize_table(raws: Sequence[Sequence[float]],
                    weights: Sequence[float] = (1.0,) * 7) -> list[EntityScoreVector]:
    columns = [min_max(col) for col in zip(*raws)] if raws else []
    rows = list(zip(*columns)) if columns else []
    vectors = []
    for raw, norm in zip(raws, rows):
        total = math.fsum(w * n for w, n in zip(weights, norm))
        vectors.append(EntityScoreVector(tuple(raw), tuple(norm), total))
    return vectors


def select_topic(candidates: Sequence[LinkedCandidate], vectors: Sequence[EntityScoreVector],
                 out_degrees: Sequence[int]) -> int:
    """Index of the winner: highest total, then out-degree, then entity name."""
    if not candidates:
        raise NoTopicEntityError("no candidate entities")
    return min(range(len(candidates)),
               key=lambda i: (-vectors[i].total, -out_degrees[i], candidates[i].entity.value,
                              candidates[i].entity.kind.value, candidates[i].span.start))


def rank(candidates: Sequence[LinkedCandidate], question: str, store: KnowledgeStore, *,
         interrogatives: Sequence[str], tokenizer: LongestMatchTokenizer,
         label_bonus: Mapping[str, float], scorer: SimilarityScorer,
         weights: Sequence[float] = (1.0,) * 7,
         ) -> tuple[LinkedCandidate, list[tuple[LinkedCandidate, EntityScoreVector]]]:
    if not candidates:
        raise NoTopicEntityError("no candidate entities")
    raws = [raw_scores(c, question, store, interrogatives=interrogatives, tokenizer=tokenizer,
                       label_bonus=label_bonus, scorer=scorer) for c in candidates]
    vectors = normalize_table(raws, weights)
    degrees = [store.out_degree(c.entity) for c in candidates]
    best = select_topic(candidates, vectors, degrees)
    return candidates[best], list(zip(candidates, vectors))
