"""Question -> topic entity -> ranked paths -> hop routing -> query -> answers."""

from __future__ import annotations

import importlib
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Protocol, Sequence

from . import candidates as cg
from . import entity_ranker
from .config import Config
from .paths import S1, S2, S3, S4, S5, PathLimits, RelationPath, enumerate_paths
from .relation_ranker import PathScoreVector, rank_paths
from .sparql import QueryAst, TriplePattern, Var, execute, serialize
from .store import Dictionaries, Entity, KnowledgeStore, MentionLexicon, Term, nfc
from .text import SCORERS, LongestMatchTokenizer, SimilarityScorer, normalize_date

logger = logging.getLogger(__name__)

SIMPLE, COMPLEX = "simple", "complex"

__all__ = ["Pipeline", "AnswerTrace", "MarginClassifier", "classify_hops", "generate_query",
           "normalize_date", "SIMPLE", "COMPLEX"]


class HopClassifier(Protocol):
    name: str

    def classify(self, question: str, ranked_paths: Sequence[tuple[RelationPath, PathScoreVector]]) -> str: ...


class MarginClassifier:
    """Complex when the best two-hop path beats the best one-hop path by more than ``tau``."""

    name = "margin"

    def __init__(self, tau: float = 0.15):
        self.tau = tau

    def classify(self, question: str, ranked_paths: Sequence[tuple[RelationPath, PathScoreVector]]) -> str:
        one = [v.total for p, v in ranked_paths if p.hops == 1]
        two = [v.total for p, v in ranked_paths if p.hops == 2]
        if not one:
            return COMPLEX
        if not two:
            return SIMPLE
        return COMPLEX if max(two) - max(one) > self.tau else SIMPLE


def classify_hops(question: str, ranked_paths: Sequence[tuple[RelationPath, PathScoreVector]],
                  classifier: HopClassifier) -> str:
    if not ranked_paths:
        raise ValueError("ranked_paths must be non-empty")
    return classifier.classify(question, ranked_paths)


def find_gender(question: str, gender_lexicon: Mapping[str, str]) -> Optional[tuple[str, str]]:
    """Earliest (then longest) gender keyword in the question and its gender."""
    hits = []
    for keyword, gender in gender_lexicon.items():
        pos = question.find(keyword)
        if pos != -1:
            hits.append((pos, -len(keyword), keyword, gender))
    if not hits:
        return None
    _, _, keyword, gender = min(hits)
    return keyword, gender


def base_patterns(topic: Term, path: RelationPath) -> tuple[str, list[TriplePattern]]:
    x, y = Var("x"), Var("y")
    preds = path.predicates
    if path.topic != topic:
        raise AssertionError("path is rooted at a different topic entity")
    if path.shape is S1:
        return "x", [TriplePattern(topic, preds[0], x)]
    if path.shape is S2:
        return "x", [TriplePattern(x, preds[0], topic)]
    if path.shape is S3:
        return "x", [TriplePattern(topic, preds[0], y), TriplePattern(y, preds[1], x)]
    if path.shape is S4:
        return "x", [TriplePattern(topic, preds[0], y), TriplePattern(x, preds[1], y)]
    if path.shape is S5:
        return "y", [TriplePattern(topic, preds[0], y), TriplePattern(path.grounded_object, preds[1], y)]
    raise AssertionError(f"unhandled shape {path.shape}")


def generate_query(topic: Term, path: RelationPath, question: str, dictionaries: Dictionaries,
                   gender: Mapping[str, str] | None = None,
                   use_gender: bool = True) -> tuple[QueryAst, list[str]]:
    """Build the query for a chosen path; returns the AST and the rules applied.

    The answer variable is ``?y`` for convergent paths and ``?x`` otherwise.
    A gender keyword in the question restricts the answer variable.
    """
    gender = gender or {"predicate": "性别", "male": "男", "female": "女"}
    rules = []
    if normalize_date(question) != question:
        rules.append("date")
    answer_var, patterns = base_patterns(topic, path)
    if path.shape is S5:
        rules.append("intermediate")
    hit = find_gender(question, dictionaries.gender_lexicon) if use_gender else None
    if hit is not None:
        patterns.append(TriplePattern(Var(answer_var), Entity(gender["predicate"]), Entity(gender[hit[1]])))
        rules.append("gender")
    return QueryAst(answer_var, tuple(patterns)), rules


@dataclass
class AnswerTrace:
    question: str
    normalized_question: str = ""
    candidates: list[tuple[cg.LinkedCandidate, entity_ranker.EntityScoreVector]] = field(default_factory=list)
    topic: Optional[cg.LinkedCandidate] = None
    paths: list[tuple[RelationPath, PathScoreVector]] = field(default_factory=list)
    paths_partial: bool = False
    hop: Optional[str] = None
    hop_fallback: bool = False
    chosen: Optional[RelationPath] = None
    query: Optional[str] = None
    ast: Optional[QueryAst] = None
    answers: list[Term] = field(default_factory=list)
    rules: list[str] = field(default_factory=list)
    retried_without_gender: bool = False
    error: Optional[str] = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "question": self.question,
            "normalized_question": self.normalized_question,
            "error": self.error,
            "candidates": [
                {"mention": c.mention, "entity": c.entity.n3(), "label": c.label, "source": c.source,
                 "span": [c.span.start, c.span.end], **vec.as_dict()}
                for c, vec in self.candidates
            ],
            "topic": self.topic.entity.n3() if self.topic else None,
            "paths": [{"shape": p.shape.value, "path": p.describe(), "instances": p.instance_count,
                       **v.as_dict()} for p, v in self.paths],
            "paths_partial": self.paths_partial,
            "hop": self.hop,
            "hop_fallback": self.hop_fallback,
            "query": self.query,
            "rules": self.rules,
            "retried_without_gender": self.retried_without_gender,
            "answers": [a.n3() for a in self.answers],
            "elapsed": self.elapsed,
        }


def load_object(spec: str) -> Any:
    module_name, _, attr = spec.partition(":")
    return getattr(importlib.import_module(module_name), attr)


def make_scorer(spec: str) -> SimilarityScorer:
    if spec in SCORERS:
        return SCORERS[spec]()
    obj = load_object(spec)
    return obj() if isinstance(obj, type) else obj


class Pipeline:
    def __init__(self, store: KnowledgeStore, lexicon: MentionLexicon, dictionaries: Dictionaries,
                 config: Optional[Config] = None, *, taggers: Optional[Sequence[cg.Tagger]] = None,
                 scorer: Optional[SimilarityScorer] = None, classifier: Optional[HopClassifier] = None,
                 tokenizer: Optional[LongestMatchTokenizer] = None):
        self.store = store.finalize()
        self.lexicon = lexicon
        self.dictionaries = dictionaries
        self.config = config or Config()
        cfg = self.config
        self.taggers = list(taggers) if taggers is not None else [
            cg.resolve_tagger(name, lexicon, self.store) for name in cfg.get("taggers")]
        self.scorer = scorer or make_scorer(cfg.get("similarity_scorer"))
        if classifier is None:
            name = cfg.get("classifier.name", "margin")
            classifier = (MarginClassifier(float(cfg.get("classifier.tau")))
                          if name == "margin" else load_object(name)())
        self.classifier = classifier
        if tokenizer is None:
            vocab = set(lexicon.keys()) | set(self.store.entity_names())
            vocab |= {p.value for p in self.store.predicates()}
            vocab |= dictionaries.stop_words | dictionaries.financial_terms
            tokenizer = LongestMatchTokenizer(vocab)
        self.tokenizer = tokenizer
        self.limits = PathLimits(int(cfg.get("path.max_fanout")), int(cfg.get("path.max_paths")),
                                 int(cfg.get("path.max_witnesses")))

    def with_config(self, config: Config) -> "Pipeline":
        """A pipeline sharing resources with this one but using ``config``."""
        custom = None if isinstance(self.classifier, MarginClassifier) else self.classifier
        return Pipeline(self.store, self.lexicon, self.dictionaries, config, taggers=self.taggers,
                        scorer=self.scorer, classifier=custom, tokenizer=self.tokenizer)

    # -- stages ---------------------------------------------------------

    def link(self, question: str) -> list[cg.LinkedCandidate]:
        spans = cg.extract_spans(question, self.taggers, self.dictionaries)
        linked = cg.link(spans, self.lexicon, self.store)
        if not linked:
            spans = cg.apply_stopword_fallback(question, [], self.dictionaries)
            linked = cg.link(spans, self.lexicon, self.store)
        return linked

    def rank_entities(self, question: str, linked: Sequence[cg.LinkedCandidate]):
        return entity_ranker.rank(
            linked, question, self.store,
            interrogatives=self.config.get("interrogatives"),
            tokenizer=self.tokenizer,
            label_bonus=self.config.get("label_bonus"),
            scorer=self.scorer,
            weights=self.config.entity_weights(),
        )

    def paths_for(self, topic: Term, linked: Sequence[cg.LinkedCandidate]):
        others = [c.entity for c in linked]
        return enumerate_paths(topic, self.store, others, self.limits)

    def rank_relations(self, paths: Sequence[RelationPath], question: str,
                       linked: Sequence[cg.LinkedCandidate]) -> list[tuple[RelationPath, PathScoreVector]]:
        return rank_paths(paths, question, linked, self.scorer, self.config.relation_weights(),
                          self.config.get("relation.separator"))

    def answer(self, question: str) -> AnswerTrace:
        started = time.perf_counter()
        trace = AnswerTrace(question=question)
        try:
            self._answer(trace)
        finally:
            trace.elapsed = time.perf_counter() - started
        return trace

    def _answer(self, trace: AnswerTrace) -> None:
        q = normalize_date(nfc(trace.question).strip())
        trace.normalized_question = q
        linked = self.link(q)
        if not linked:
            trace.error = "no-entity"
            return
        topic, table = self.rank_entities(q, linked)
        trace.candidates, trace.topic = table, topic
        result = self.paths_for(topic.entity, linked)
        trace.paths_partial = result.partial
        if not result.paths:
            trace.error = "no-relation"
            return
        ranked = self.rank_relations(result.paths, q, linked)
        trace.paths = ranked[: int(self.config.get("pipeline.top_k"))]
        hop = classify_hops(q, ranked, self.classifier)
        wanted = 1 if hop == SIMPLE else 2
        pool = [p for p, _ in ranked if p.hops == wanted]
        if not pool:
            trace.hop_fallback = True
            pool = [p for p, _ in ranked]
        trace.hop = hop
        trace.chosen = pool[0]
        gender = self.config.get("gender")
        ast, rules = generate_query(topic.entity, trace.chosen, q, self.dictionaries, gender)
        answers = execute(ast, self.store)
        if not answers and "gender" in rules:
            ast, rules = generate_query(topic.entity, trace.chosen, q, self.dictionaries, gender,
                                        use_gender=False)
            answers = execute(ast, self.store)
            trace.retried_without_gender = True
        if q != nfc(trace.question).strip() and "date" not in rules:
            rules.insert(0, "date")
        trace.ast, trace.query, trace.rules, trace.answers = ast, serialize(ast), rules, answers
