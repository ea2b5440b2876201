"""Relation-path scoring and similarity training-pair export."""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from .candidates import LinkedCandidate, find_all
from .paths import SHAPE_PREFERENCE, S5, RelationPath
from .text import SimilarityScorer, char_overlap

MASK = "<e>"
DEFAULT_WEIGHTS = {"rel": 0.6, "obj": 0.2, "char": 0.2}


class NoRelationError(LookupError):
    pass


@dataclass(frozen=True)
class MaskedQuestion:
    original: str
    masked: str

    @property
    def without_masks(self) -> str:
        return self.masked.replace(MASK, "")


@dataclass(frozen=True)
class PathScoreVector:
    rel_similarity: float
    obj_similarity: float
    char_overlap: float
    total: float

    def as_dict(self) -> dict[str, float]:
        return {"rel": self.rel_similarity, "obj": self.obj_similarity,
                "char": self.char_overlap, "total": self.total}


def mask_entities(question: str, candidates: Iterable[LinkedCandidate | str]) -> MaskedQuestion:
    """Replace mention occurrences with ``<e>``, longest mentions first."""
    surfaces = {c if isinstance(c, str) else c.mention for c in candidates}
    surfaces.discard("")
    taken: list[tuple[int, int]] = []
    for surface in sorted(surfaces, key=lambda s: (-len(s), s)):
        for start in find_all(question, surface):
            end = start + len(surface)
            if all(end <= a or start >= b for a, b in taken):
                taken.append((start, end))
    pieces, pos = [], 0
    for start, end in sorted(taken):
        pieces.append(question[pos:start])
        pieces.append(MASK)
        pos = end
    pieces.append(question[pos:])
    return MaskedQuestion(question, "".join(pieces))


def score_relation_similarity(path: RelationPath, masked: MaskedQuestion, scorer: SimilarityScorer,
                              separator: str = " ") -> float:
    return float(scorer.score(path.chain_text(separator), masked.masked))


def score_object_similarity(path: RelationPath, masked: MaskedQuestion, scorer: SimilarityScorer) -> float:
    """Grounded object (S5) or best witness answer against the unmasked question.

    Witnesses that loop back to the topic entity are ignored.
    """
    objects = [o for o in path.terminal_objects() if o != path.topic or path.shape is S5]
    if not objects:
        return 0.0
    return max(float(scorer.score(o.value, masked.original)) for o in objects)


def score_path_char_overlap(path: RelationPath, masked: MaskedQuestion) -> float:
    return char_overlap("".join(p.value for p in path.predicates), masked.without_masks)


def combine(rel: float, obj: float, char: float, weights: Mapping[str, float]) -> PathScoreVector:
    if any(w < 0 for w in weights.values()):
        raise ValueError("relation weights must be non-negative")
    total = math.fsum((weights["rel"] * rel, weights["obj"] * obj, weights["char"] * char))
    return PathScoreVector(rel, obj, char, total)


def rank_sort_key(item: tuple[RelationPath, PathScoreVector]) -> tuple:
    path, vec = item
    grounded = path.grounded_object.value if path.grounded_object else ""
    return (-vec.total, len(path.predicates), tuple(p.value for p in path.predicates),
            SHAPE_PREFERENCE[path.shape], grounded)


def rank_paths(paths: Sequence[RelationPath], question: str, candidates: Iterable[LinkedCandidate | str],
               scorer: SimilarityScorer, weights: Mapping[str, float] = DEFAULT_WEIGHTS,
               separator: str = " ") -> list[tuple[RelationPath, PathScoreVector]]:
    if not paths:
        raise NoRelationError("no relation paths")
    masked = mask_entities(question, candidates)
    scored = []
    for path in paths:
        vec = combine(
            score_relation_similarity(path, masked, scorer, separator),
            score_object_similarity(path, masked, scorer),
            score_path_char_overlap(path, masked),
            weights,
        )
        scored.append((path, vec))
    scored.sort(key=rank_sort_key)
    return scored


# -- similarity training pairs ---------------------------------------------

@dataclass(frozen=True)
class SimilarityPair:
    text_a: str
    text_b: str
    label: str  # "positive" | "negative"

    def to_tsv(self) -> str:
        label = "1" if self.label == "positive" else "0"
        return f"{label}\t{_tsv_clean(self.text_a)}\t{_tsv_clean(self.text_b)}"


def _tsv_clean(text: str) -> str:
    return re.sub(r"[\t\r\n]+", " ", text)


@dataclass(frozen=True)
class TrainingItem:
    """One question's material for pair construction."""
    question_id: str
    masked_question: str
    gold_chain: tuple[str, ...] | None
    candidate_chains: tuple[tuple[str, ...], ...]


def negative_pool(gold: tuple[str, ...], chains: Iterable[tuple[str, ...]]) -> list[tuple[str, ...]]:
    pool = {c for c in chains if c != gold}
    if len(gold) == 2:
        # keep the gold one-hop prefix and its siblings out of two-hop negatives
        pool = {c for c in pool if c[0] != gold[0]}
    return sorted(pool)


def build_similarity_training_set(items: Sequence[TrainingItem], *, pos_oversample: int = 5,
                                  neg_per_question: int = 5, seed: int = 0, separator: str = " ",
                                  skipped: list[str] | None = None) -> list[SimilarityPair]:
    rng = random.Random(seed)
    pairs: list[SimilarityPair] = []
    for item in items:
        if not item.gold_chain:
            if skipped is not None:
                skipped.append(item.question_id)
            continue
        positive = separator.join(item.gold_chain)
        pairs.extend(SimilarityPair(item.masked_question, positive, "positive") for _ in range(pos_oversample))
        pool = negative_pool(tuple(item.gold_chain), item.candidate_chains)
        for chain in rng.sample(pool, min(neg_per_question, len(pool))):
            pairs.append(SimilarityPair(item.masked_question, separator.join(chain), "negative"))
    return pairs


def write_pairs(pairs: Iterable[SimilarityPair], fh: TextIO) -> None:
    for pair in pairs:
        fh.write(pair.to_tsv() + "\n")


def chains_of(paths: Iterable[RelationPath]) -> tuple[tuple[str, ...], ...]:
    return tuple(sorted({tuple(p.value for p in path.predicates) for path in paths}))
