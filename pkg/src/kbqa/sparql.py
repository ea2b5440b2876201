"""Restricted SPARQL: AST, parser, canonical serializer and BGP executor.

Grammar (whitespace-insensitive between tokens)::

    query   := "select" VAR "where" "{" [ pattern ( "." pattern )* [ "." ] ] "}"
    pattern := term term term
    term    := VAR | IRI | LITERAL
    VAR     := "?" [A-Za-z][A-Za-z0-9]*
    IRI     := "<" [^<>\\t\\n]+ ">"
    LITERAL := '"' ( [^"\\\\] | "\\\\" . )* '"'

Canonical text: a single pattern is written ``{s p o}``; several patterns are
written ``{s p o. s p o.}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Union

from .store import Entity, KnowledgeStore, Literal, Term

MAX_PATTERNS = 4
_VAR_NAME = re.compile(r"[A-Za-z][A-Za-z0-9]*\Z")


class QueryError(ValueError):
    pass


class QuerySyntaxError(QueryError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class QueryValidationError(QueryError):
    pass


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if not _VAR_NAME.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")

    def n3(self) -> str:
        return f"?{self.name}"


QueryTerm = Union[Term, Var]


def _render(term: QueryTerm) -> str:
    return term.n3()


@dataclass(frozen=True)
class TriplePattern:
    subject: QueryTerm
    predicate: QueryTerm
    object: QueryTerm

    def __iter__(self) -> Iterator[QueryTerm]:
        return iter((self.subject, self.predicate, self.object))

    def variables(self) -> set[str]:
        return {t.name for t in self if isinstance(t, Var)}

    def render(self) -> str:
        return " ".join(_render(t) for t in self)


@dataclass(frozen=True)
class QueryAst:
    projected: str
    patterns: tuple[TriplePattern, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "patterns", tuple(self.patterns))
        validate(self)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for tp in self.patterns:
            out |= tp.variables()
        return out


def validate(ast: QueryAst) -> None:
    if not _VAR_NAME.match(ast.projected):
        raise QueryValidationError(f"invalid projected variable {ast.projected!r}")
    if len(ast.patterns) > MAX_PATTERNS:
        raise QueryValidationError(f"at most {MAX_PATTERNS} patterns are supported")
    for tp in ast.patterns:
        for pos, term in zip(("subject", "predicate"), (tp.subject, tp.predicate)):
            if isinstance(term, Term) and term.is_literal:
                raise QueryValidationError(f"literal in {pos} position")
    if ast.projected not in ast.variables():
        raise QueryValidationError(f"projected variable ?{ast.projected} does not occur in the pattern")
    # connectivity through shared variables
    pending = list(ast.patterns[1:])
    reached = set(ast.patterns[0].variables())
    progress = True
    while pending and progress:
        progress = False
        for tp in list(pending):
            if tp.variables() & reached:
                reached |= tp.variables()
                pending.remove(tp)
                progress = True
    if pending:
        raise QueryValidationError("pattern graph is not connected")


def serialize(ast: QueryAst) -> str:
    if len(ast.patterns) == 1:
        body = ast.patterns[0].render()
    else:
        body = " ".join(tp.render() + "." for tp in ast.patterns)
    return f"select ?{ast.projected} where {{{body}}}"


# -- parser ---------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<var>\?[A-Za-z][A-Za-z0-9]*)
  | (?P<iri><[^<>\t\n]+>)
  | (?P<lit>"(?:[^"\\]|\\.)*")
  | (?P<punct>[{}.])
  | (?P<word>[A-Za-z]+)
""", re.VERBOSE | re.DOTALL)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise QuerySyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", r"\1", body, flags=re.DOTALL)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, value: Optional[str] = None, lower: bool = False) -> tuple[str, str, int]:
        tok = self.next()
        got = tok[1].lower() if lower else tok[1]
        if tok[0] != kind or (value is not None and got != value):
            want = value if value is not None else kind
            raise QuerySyntaxError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def term(self) -> QueryTerm:
        kind, value, pos = self.next()
        if kind == "var":
            return Var(value[1:])
        if kind == "iri":
            try:
                return Entity(value[1:-1])
            except ValueError as exc:
                raise QuerySyntaxError(str(exc), pos) from exc
        if kind == "lit":
            try:
                return Literal(_unescape(value[1:-1]))
            except ValueError as exc:
                raise QuerySyntaxError(str(exc), pos) from exc
        raise QuerySyntaxError(f"expected a term, found {value or 'end of input'!r}", pos)

    def query(self) -> QueryAst:
        self.expect("word", "select", lower=True)
        projected = self.expect("var")[1][1:]
        self.expect("word", "where", lower=True)
        self.expect("punct", "{")
        patterns = []
        while self.peek()[1] != "}":
            patterns.append(TriplePattern(self.term(), self.term(), self.term()))
            kind, value, pos = self.peek()
            if value == ".":
                self.next()
            elif value != "}":
                raise QuerySyntaxError(f"expected '.' or '}}', found {value or 'end of input'!r}", pos)
        self.expect("punct", "}")
        self.expect("eof")
        return QueryAst(projected, tuple(patterns))


def parse(text: str) -> QueryAst:
    return _Parser(text).query()


# -- executor -------------------------------------------------------------

def _resolve(term: QueryTerm, binding: dict[str, Term]) -> Optional[Term]:
    if isinstance(term, Var):
        return binding.get(term.name)
    return term


def _bound_count(tp: TriplePattern, bound: set[str]) -> int:
    return sum(1 for t in tp if not isinstance(t, Var) or t.name in bound)


def plan(patterns: Sequence[TriplePattern], store: KnowledgeStore) -> list[TriplePattern]:
    """Greedy order: most bound positions first, then smallest index estimate."""
    remaining = list(patterns)
    bound: set[str] = set()
    order = []
    while remaining:
        def cost(tp: TriplePattern) -> tuple:
            consts = [t if not isinstance(t, Var) else None for t in tp]
            return (-_bound_count(tp, bound), store.estimate(*consts))
        connected = [tp for tp in remaining if not order or tp.variables() & bound
                     or _bound_count(tp, bound) == 3]
        best = min(connected or remaining, key=cost)
        remaining.remove(best)
        order.append(best)
        bound |= best.variables()
    return order


def _solutions(order: list[TriplePattern], store: KnowledgeStore, i: int,
               binding: dict[str, Term]) -> Iterator[dict[str, Term]]:
    if i == len(order):
        yield binding
        return
    tp = order[i]
    s, p, o = (_resolve(t, binding) for t in tp)
    if (s is not None and s.is_literal) or (p is not None and p.is_literal):
        return
    for triple in store.match(s, p, o):
        extended = dict(binding)
        ok = True
        for qt, value in zip(tp, triple):
            if isinstance(qt, Var):
                prev = extended.get(qt.name)
                if prev is None:
                    extended[qt.name] = value
                elif prev != value:
                    ok = False
                    break
        if ok:
            yield from _solutions(order, store, i + 1, extended)


def execute(ast: QueryAst, store: KnowledgeStore) -> list[Term]:
    """Distinct bindings of the projected variable, sorted."""
    order = plan(ast.patterns, store)
    answers = {sol[ast.projected] for sol in _solutions(order, store, 0, {})}
    return sorted(answers)
