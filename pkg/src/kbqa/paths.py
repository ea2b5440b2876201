"""Relation-path enumeration within two hops of a topic entity."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .store import KnowledgeStore, Term


class PathShape(str, enum.Enum):
    S1_FORWARD_1HOP = "S1"   # (e, p, ?x)
    S2_REVERSE_1HOP = "S2"   # (?x, p, e)
    S3_CHAIN_FF = "S3"       # (e, p1, ?y) (?y, p2, ?x)
    S4_CHAIN_FR = "S4"       # (e, p1, ?y) (?x, p2, ?y)
    S5_CONVERGENT = "S5"     # (e, p1, ?y) (o, p2, ?y), o grounded

    @property
    def hops(self) -> int:
        return 1 if self in (PathShape.S1_FORWARD_1HOP, PathShape.S2_REVERSE_1HOP) else 2


S1, S2, S3, S4, S5 = PathShape

# tie-break preference between shapes sharing a predicate chain
SHAPE_PREFERENCE = {S5: 0, S1: 1, S2: 2, S3: 3, S4: 4}


@dataclass(frozen=True)
class PathLimits:
    max_fanout: int = 200
    max_paths: int = 10_000
    max_witnesses: int = 5


@dataclass(frozen=True)
class RelationPath:
    shape: PathShape
    predicates: tuple[Term, ...]
    topic: Term
    grounded_object: Optional[Term] = None
    # each witness maps variable name ("x", "y") to a term
    witnesses: tuple[tuple[tuple[str, Term], ...], ...] = ()
    instance_count: int = 0

    def __post_init__(self) -> None:
        if len(self.predicates) != self.shape.hops:
            raise ValueError(f"{self.shape.value} needs {self.shape.hops} predicates")
        if (self.grounded_object is not None) != (self.shape is S5):
            raise ValueError("grounded_object is required for S5 and only S5")

    @property
    def key(self) -> tuple:
        return (self.shape, self.predicates, self.grounded_object)

    @property
    def hops(self) -> int:
        return self.shape.hops

    def chain_text(self, separator: str = " ") -> str:
        return separator.join(p.value for p in self.predicates)

    def terminal_objects(self) -> list[Term]:
        """Values of the answer-side endpoint across witnesses."""
        if self.shape is S5:
            return [self.grounded_object]
        return [dict(w)["x"] for w in self.witnesses]

    def describe(self) -> str:
        names = [f"<{p.value}>" for p in self.predicates]
        t = f"<{self.topic.value}>"
        if self.shape is S1:
            return f"{t} {names[0]} ?x"
        if self.shape is S2:
            return f"?x {names[0]} {t}"
        if self.shape is S3:
            return f"{t} {names[0]} ?y . ?y {names[1]} ?x"
        if self.shape is S4:
            return f"{t} {names[0]} ?y . ?x {names[1]} ?y"
        return f"{t} {names[0]} ?y . {self.grounded_object.n3()} {names[1]} ?y"


@dataclass
class PathSearchResult:
    paths: list[RelationPath]
    partial: bool = False
    truncated_nodes: list[Term] = field(default_factory=list)

    def __iter__(self):
        return iter(self.paths)

    def __len__(self) -> int:
        return len(self.paths)


class _Collector:
    def __init__(self, topic: Term, limits: PathLimits):
        self.topic = topic
        self.limits = limits
        self.found: dict[tuple, list] = {}
        self.partial = False

    def add(self, shape: PathShape, preds: tuple[Term, ...], grounded: Optional[Term],
            binding: tuple[tuple[str, Term], ...]) -> None:
        key = (shape, preds, grounded)
        entry = self.found.get(key)
        if entry is None:
            if len(self.found) >= self.limits.max_paths:
                self.partial = True
                return
            entry = self.found[key] = [[], 0]
        entry[1] += 1
        if len(entry[0]) < self.limits.max_witnesses:
            entry[0].append(binding)

    def result(self, truncated: list[Term]) -> PathSearchResult:
        paths = [
            RelationPath(shape, preds, self.topic, grounded, tuple(w), count)
            for (shape, preds, grounded), (w, count) in self.found.items()
        ]
        paths.sort(key=path_sort_key)
        return PathSearchResult(paths, self.partial or bool(truncated), truncated)


def path_sort_key(path: RelationPath) -> tuple:
    grounded = path.grounded_object
    return (path.shape.value, path.predicates,
            (grounded.value, grounded.kind.value) if grounded else ("", ""))


def enumerate_paths(topic: Term, store: KnowledgeStore, other_candidates: Iterable[Term] = (),
                    limits: PathLimits = PathLimits()) -> PathSearchResult:
    """All distinct (shape, predicate chain, grounded object) combinations.

    A node whose adjacency list exceeds ``max_fanout`` is explored only through
    the first ``max_fanout`` edges in index order, and the result is flagged
    partial.
    """
    others = {o for o in other_candidates if o != topic and not o.is_literal}
    collector = _Collector(topic, limits)
    truncated: list[Term] = []

    def capped(edges: list, node: Term) -> list:
        if len(edges) > limits.max_fanout:
            truncated.append(node)
            return edges[:limits.max_fanout]
        return edges

    out_edges = capped(store.neighbors_out(topic), topic)
    for p, x in out_edges:
        collector.add(S1, (p,), None, (("x", x),))
    for p, x in capped(store.neighbors_in(topic), topic):
        collector.add(S2, (p,), None, (("x", x),))
    for p1, y in out_edges:
        if not y.is_literal:
            for p2, x in capped(store.neighbors_out(y), y):
                collector.add(S3, (p1, p2), None, (("y", y), ("x", x)))
        for p2, x in capped(store.neighbors_in(y), y):
            collector.add(S4, (p1, p2), None, (("y", y), ("x", x)))
            if x in others:
                collector.add(S5, (p1, p2), x, (("y", y),))
    return collector.result(truncated)


def one_hop(paths: Sequence) -> list:
    return [p for p in paths if _path_of(p).hops == 1]


def two_hop(paths: Sequence) -> list:
    return [p for p in paths if _path_of(p).hops == 2]


def _path_of(item) -> RelationPath:
    return item[0] if isinstance(item, tuple) else item
