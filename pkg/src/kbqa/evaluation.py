"""QA datasets, averaged F1, hop coverage, ablations and training-pair export."""

from __future__ import annotations

import json
import logging
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Mapping, Optional, Sequence

from .paths import RelationPath
from .pipeline import AnswerTrace, Pipeline, generate_query
from .relation_ranker import (SimilarityPair, TrainingItem, build_similarity_training_set, chains_of,
                              mask_entities)
from .sparql import QueryAst, QueryError, Var, execute, parse
from .store import Dictionaries, Entity, IngestReport, KnowledgeStore, Literal, Term, unescape_literal

logger = logging.getLogger(__name__)

ERROR_CLASSES = ("no-entity", "no-relation", "wrong-entity", "wrong-path", "wrong-answer")


@dataclass(frozen=True)
class QaExample:
    id: str
    question: str
    gold_answers: frozenset[Term]
    gold_query: Optional[str] = None
    topic: Optional[Term] = None


def answer_term(text: str) -> Term:
    text = text.strip()
    if len(text) >= 2 and text[0] == "<" and text[-1] == ">":
        return Entity(text[1:-1])
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        return Literal(unescape_literal(text[1:-1]))
    return Literal(text)


def parse_qa_line(line: str, lineno: int = 0) -> QaExample:
    obj = json.loads(line)
    answers = frozenset(answer_term(a) for a in obj["answers"])
    if not answers:
        raise ValueError("empty answer set")
    topic = None
    if obj.get("topic"):
        # a bare topic names an entity, unlike a bare answer
        raw = obj["topic"].strip()
        topic = answer_term(raw) if raw[0] in "<\"" else Entity(raw)
    return QaExample(str(obj.get("id", lineno)), obj["question"], answers, obj.get("sparql"), topic)


def load_qa(path: str | Path) -> tuple[list[QaExample], IngestReport]:
    report = IngestReport()
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                examples.append(parse_qa_line(line, lineno))
                report.parsed += 1
            except (ValueError, KeyError, TypeError) as exc:
                report.skipped.append((lineno, str(exc)))
    if report.skipped:
        logger.warning("skipped %d QA lines", len(report.skipped))
    return examples, report


# -- metrics ---------------------------------------------------------------

def prf(pred: Iterable[Term], gold: Iterable[Term]) -> tuple[float, float, float]:
    pred, gold = set(pred), set(gold)
    hit = len(pred & gold)
    if not pred or not gold or not hit:
        return 0.0, 0.0, 0.0
    p, r = hit / len(pred), hit / len(gold)
    return p, r, 2 * p * r / (p + r)


@dataclass
class QuestionResult:
    id: str
    precision: float
    recall: float
    f1: float
    exact: bool
    error: Optional[str]
    topic_correct: Optional[bool]


@dataclass
class HopCoverage:
    one_hop: int
    two_hop: int
    total: int

    @property
    def ratio(self) -> float:
        return (self.one_hop + self.two_hop) / self.total if self.total else 0.0

    def as_dict(self) -> dict:
        return {"one_hop": self.one_hop, "two_hop": self.two_hop, "total": self.total, "ratio": self.ratio}


@dataclass
class EvalReport:
    results: list[QuestionResult]
    macro_f1: float
    accuracy: float
    topic_accuracy: Optional[float]
    errors: Counter
    coverage: Optional[HopCoverage] = None
    elapsed: float = 0.0

    def as_dict(self) -> dict:
        return {
            "questions": len(self.results),
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "topic_accuracy": self.topic_accuracy,
            "errors": {k: self.errors.get(k, 0) for k in ERROR_CLASSES},
            "coverage": self.coverage.as_dict() if self.coverage else None,
            "per_question": [r.__dict__ for r in self.results],
        }


def _gold_constants(ast: QueryAst, dictionaries_gender: Mapping[str, str]) -> set[Term]:
    skip = {Entity(dictionaries_gender["male"]), Entity(dictionaries_gender["female"])}
    out = set()
    for tp in ast.patterns:
        for term in (tp.subject, tp.object):
            if not isinstance(term, Var) and term not in skip:
                out.add(term)
    return out


def gold_chain(ast: QueryAst, gender_predicate: str) -> tuple[str, ...]:
    return tuple(tp.predicate.value for tp in ast.patterns
                 if not isinstance(tp.predicate, Var) and tp.predicate.value != gender_predicate)


def classify_error(trace: AnswerTrace, example: QaExample, gender: Mapping[str, str]) -> str:
    if trace.error:
        return trace.error
    if example.gold_query:
        try:
            gold = parse(example.gold_query)
        except QueryError:
            return "wrong-answer"
        if trace.topic is None or trace.topic.entity not in _gold_constants(gold, gender):
            return "wrong-entity"
        if trace.chosen is None or gold_chain(gold, gender["predicate"]) != tuple(
                p.value for p in trace.chosen.predicates):
            return "wrong-path"
    return "wrong-answer"


def evaluate(examples: Sequence[QaExample], pipeline: Pipeline, coverage: bool = True) -> EvalReport:
    gender = pipeline.config.get("gender")
    results, errors, elapsed = [], Counter(), 0.0
    for ex in examples:
        trace = pipeline.answer(ex.question)
        elapsed += trace.elapsed
        p, r, f = prf(trace.answers, ex.gold_answers)
        exact = not trace.error and set(trace.answers) == set(ex.gold_answers)
        error = None if exact else classify_error(trace, ex, gender)
        if error:
            errors[error] += 1
        topic_ok = None
        if ex.topic is not None:
            topic_ok = trace.topic is not None and trace.topic.entity == ex.topic
        results.append(QuestionResult(ex.id, p, r, f, exact, error, topic_ok))
    annotated = [r.topic_correct for r in results if r.topic_correct is not None]
    return EvalReport(
        results=results,
        macro_f1=fmean(r.f1 for r in results) if results else 0.0,
        accuracy=fmean(r.exact for r in results) if results else 0.0,
        topic_accuracy=fmean(annotated) if annotated else None,
        errors=errors,
        coverage=hop_coverage(examples, pipeline) if coverage else None,
        elapsed=elapsed,
    )


# -- hop coverage ----------------------------------------------------------

def path_answers(path: RelationPath, store: KnowledgeStore) -> set[Term]:
    ast, _ = generate_query(path.topic, path, "", Dictionaries())
    return set(execute(ast, store))


def hop_coverage(examples: Sequence[QaExample], pipeline: Pipeline) -> HopCoverage:
    """Questions whose gold answers are all reached by a one-hop path, or
    failing that by a two-hop path, from the selected topic entity."""
    one = two = 0
    for ex in examples:
        q = pipeline.answer(ex.question)
        if q.topic is None:
            continue
        result = pipeline.paths_for(q.topic.entity, [c for c, _ in q.candidates])
        gold = set(ex.gold_answers)
        reach = [p for p in result.paths if gold <= path_answers(p, pipeline.store)]
        if any(p.hops == 1 for p in reach):
            one += 1
        elif reach:
            two += 1
    return HopCoverage(one, two, len(examples))


# -- dev split and ablation -----------------------------------------------

def split_dev(examples: Sequence[QaExample], n: int, seed: int = 0) -> tuple[list[QaExample], list[QaExample]]:
    if n > len(examples):
        raise ValueError(f"cannot take {n} dev examples from {len(examples)}")
    chosen = random.Random(seed).sample(range(len(examples)), n)
    picked = set(chosen)
    return [e for i, e in enumerate(examples) if i not in picked], [examples[i] for i in chosen]


# score components switched off in each row
ABLATION_MASKS: dict[str, tuple[str, ...]] = {
    "baseline": ("s2", "s7"),
    "baseline+out-degree": ("s7",),
    "baseline+similarity": ("s2",),
    "baseline+out-degree+similarity": (),
}


def ablate(examples: Sequence[QaExample], pipeline: Pipeline,
           masks: Mapping[str, Sequence[str]] = ABLATION_MASKS) -> list[tuple[str, float]]:
    """Topic-entity accuracy per feature mask (answer exact match when unannotated)."""
    rows = []
    for name, off in masks.items():
        config = pipeline.config.copy()
        for feature in off:
            config.set(f"entity_weights.{feature}", 0.0)
        variant = pipeline.with_config(config)
        correct = 0
        for ex in examples:
            trace = variant.answer(ex.question)
            if ex.topic is not None:
                correct += trace.topic is not None and trace.topic.entity == ex.topic
            else:
                correct += not trace.error and set(trace.answers) == set(ex.gold_answers)
        rows.append((name, correct / len(examples) if examples else 0.0))
    return rows


# -- training pairs --------------------------------------------------------

def training_items(examples: Sequence[QaExample], pipeline: Pipeline) -> list[TrainingItem]:
    gender_pred = pipeline.config.get("gender.predicate")
    items = []
    for ex in examples:
        trace = pipeline.answer(ex.question)
        linked = [c for c, _ in trace.candidates]
        masked = mask_entities(trace.normalized_question, linked).masked
        gold = None
        if ex.gold_query:
            try:
                gold = gold_chain(parse(ex.gold_query), gender_pred) or None
            except QueryError as exc:
                logger.warning("question %s: bad gold query: %s", ex.id, exc)
        chains: tuple = ()
        if trace.topic is not None:
            chains = chains_of(pipeline.paths_for(trace.topic.entity, linked).paths)
        items.append(TrainingItem(ex.id, masked, gold, chains))
    return items


def export_pairs(examples: Sequence[QaExample], pipeline: Pipeline, seed: Optional[int] = None,
                 skipped: Optional[list[str]] = None) -> list[SimilarityPair]:
    cfg = pipeline.config
    return build_similarity_training_set(
        training_items(examples, pipeline),
        pos_oversample=int(cfg.get("training.pos_oversample")),
        neg_per_question=int(cfg.get("training.neg_per_question")),
        seed=int(cfg.get("training.seed") if seed is None else seed),
        separator=cfg.get("relation.separator"),
        skipped=skipped,
    )


# -- CCKS conversion -------------------------------------------------------

def convert_ccks(lines: Iterable[str]) -> list[dict]:
    """Convert ``qN:question`` / sparql / answers blocks to JSON-lines records.

    The answer line holds TAB-separated answers written ``<entity>`` or
    ``"literal"``.
    """
    records, block = [], []

    def flush() -> None:
        if not block:
            return
        head = block[0]
        qid, _, question = head.partition(":")
        record = {"id": qid.strip(), "question": question.strip()}
        if len(block) > 1:
            record["sparql"] = block[1].strip()
        record["answers"] = [a for a in block[2].split("\t") if a.strip()] if len(block) > 2 else []
        records.append(record)
        block.clear()

    for line in lines:
        line = line.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if block and len(block) >= 3:
            flush()
        block.append(line)
    flush()
    return records
