"""Shared generators and brute-force oracles for the test-suite."""

from __future__ import annotations

import itertools
import random
from collections import Counter

from kbqa.paths import S1, S2, S3, S4, S5
from kbqa.sparql import QueryAst, QueryValidationError, TriplePattern, Var
from kbqa.store import Entity, KnowledgeStore, Literal, Term, Triple

VAR_NAMES = ("x", "y", "z")


def random_vocab(rng: random.Random, max_entities: int = 20, max_predicates: int = 5,
                 max_literals: int = 4) -> tuple[list[Term], list[Term], list[Term]]:
    entities = [Entity(f"e{i}") for i in range(rng.randint(2, max_entities))]
    predicates = [Entity(f"p{i}") for i in range(rng.randint(1, max_predicates))]
    literals = [Literal(f"v{i}") for i in range(rng.randint(0, max_literals))]
    return entities, predicates, literals


def random_store(rng: random.Random, max_triples: int = 2000, **vocab) -> tuple[KnowledgeStore, tuple]:
    entities, predicates, literals = random_vocab(rng, **vocab)
    objects = entities + literals
    store = KnowledgeStore()
    for _ in range(rng.randint(0, max_triples)):
        store.add(Triple(rng.choice(entities), rng.choice(predicates), rng.choice(objects)))
    return store.finalize(), (entities, predicates, literals)


def random_query(rng: random.Random, vocab: tuple, max_patterns: int = 3, tries: int = 100) -> QueryAst:
    entities, predicates, literals = vocab
    # include an unknown constant now and then
    entities = entities + [Entity("missing")]
    for _ in range(tries):
        patterns = []
        for _ in range(rng.randint(1, max_patterns)):
            s = Var(rng.choice(VAR_NAMES)) if rng.random() < 0.6 else rng.choice(entities)
            p = Var(rng.choice(VAR_NAMES)) if rng.random() < 0.15 else rng.choice(predicates)
            pool = entities + literals
            o = Var(rng.choice(VAR_NAMES)) if rng.random() < 0.6 else rng.choice(pool)
            patterns.append(TriplePattern(s, p, o))
        names = sorted({v for tp in patterns for v in tp.variables()})
        if not names:
            continue
        try:
            return QueryAst(rng.choice(names), tuple(patterns))
        except QueryValidationError:
            continue
    raise RuntimeError("could not draw a valid query")


def brute_force_execute(ast: QueryAst, store: KnowledgeStore) -> list[Term]:
    """Try every assignment of stored terms to the query variables."""
    facts = set(store.triples())
    terms = sorted({t for tr in facts for t in tr})
    names = sorted(ast.variables())
    answers = set()
    for values in itertools.product(terms, repeat=len(names)):
        binding = dict(zip(names, values))
        ok = True
        for tp in ast.patterns:
            s, p, o = (binding[t.name] if isinstance(t, Var) else t for t in tp)
            if s.is_literal or p.is_literal or Triple(s, p, o) not in facts:
                ok = False
                break
        if ok:
            answers.add(binding[ast.projected])
    return sorted(answers)


def brute_force_paths(topic: Term, store: KnowledgeStore, others=()) -> Counter:
    """Double loop over all triples; counts instances per (shape, chain, grounded)."""
    others = {o for o in others if o != topic and not o.is_literal}
    triples = store.triples()
    found: Counter = Counter()
    for t1 in triples:
        if t1.subject == topic:
            found[(S1, (t1.predicate,), None)] += 1
        if t1.object == topic:
            found[(S2, (t1.predicate,), None)] += 1
    for t1 in triples:
        if t1.subject != topic:
            continue
        y = t1.object
        for t2 in triples:
            chain = (t1.predicate, t2.predicate)
            if t2.subject == y:
                found[(S3, chain, None)] += 1
            if t2.object == y:
                found[(S4, chain, None)] += 1
                if t2.subject in others:
                    found[(S5, chain, t2.subject)] += 1
    return found
