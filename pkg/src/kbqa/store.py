"""In-memory triple store, mention lexicon and dictionaries.

The store is filled through :meth:`KnowledgeStore.ingest` (or
:meth:`KnowledgeStore.add`) and then frozen with :meth:`KnowledgeStore.finalize`,
after which only read operations are allowed.
"""

from __future__ import annotations

import enum
import logging
import re
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

logger = logging.getLogger(__name__)


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


class TermKind(str, enum.Enum):
    ENTITY = "entity"
    LITERAL = "literal"


_FORBIDDEN_IN_ENTITY = set("<>\t\n")


@dataclass(frozen=True, order=True)
class Term:
    """A KB constant. Entities are stored without ``<>``, literals without quotes."""

    value: str
    kind: TermKind = TermKind.ENTITY

    def __post_init__(self) -> None:
        value = nfc(self.value)
        if not value:
            raise ValueError("term value must be non-empty")
        if self.kind is TermKind.ENTITY and _FORBIDDEN_IN_ENTITY & set(value):
            raise ValueError(f"illegal character in entity {value!r}")
        object.__setattr__(self, "value", value)

    @property
    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL

    def n3(self) -> str:
        if self.is_literal:
            escaped = self.value.replace("\\", "\\\\").replace('"', '\\"')
            return f'"{escaped}"'
        return f"<{self.value}>"

    def __str__(self) -> str:
        return self.n3()


def Entity(value: str) -> Term:
    return Term(value, TermKind.ENTITY)


def Literal(value: str) -> Term:
    return Term(value, TermKind.LITERAL)


def unescape_literal(body: str) -> str:
    """Inverse of the escaping done by ``Term.n3`` for literals."""
    return re.sub(r'\\([\\"])', r"\1", body)


def parse_term(text: str) -> Term:
    """Parse ``<iri>`` or ``"literal"``; anything else is a ValueError."""
    if len(text) >= 2 and text[0] == "<" and text[-1] == ">":
        return Entity(text[1:-1])
    if len(text) >= 2 and text[0] == '"' and text[-1] == '"':
        return Literal(unescape_literal(text[1:-1]))
    raise ValueError(f"not a term: {text!r}")


@dataclass(frozen=True, order=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if self.subject.is_literal or self.predicate.is_literal:
            raise ValueError("subject and predicate must be entities")

    def __iter__(self) -> Iterator[Term]:
        return iter((self.subject, self.predicate, self.object))


class StoreFrozenError(RuntimeError):
    pass


class MalformedLineError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno
        self.reason = reason


@dataclass
class IngestReport:
    parsed: int = 0
    added: int = 0
    duplicates: int = 0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def __str__(self) -> str:
        return (f"parsed={self.parsed} added={self.added} "
                f"duplicates={self.duplicates} skipped={len(self.skipped)}")


def parse_triple_line(line: str) -> Triple:
    fields = line.rstrip("\r\n").split("\t")
    if len(fields) != 3:
        raise ValueError(f"expected 3 TAB-separated fields, got {len(fields)}")
    s, p, o = fields
    if not (s.startswith("<") and s.endswith(">")):
        raise ValueError("subject must be <...>")
    if not (p.startswith("<") and p.endswith(">")):
        raise ValueError("predicate must be <...>")
    return Triple(parse_term(s), parse_term(p), parse_term(o))


class KnowledgeStore:
    """Triple set with subject- and object-keyed indexes.

    Literals are indexed on the object side like entities, so reverse lookups
    over literal values work.
    """

    def __init__(self) -> None:
        self._triples: set[Triple] = set()
        self._frozen = False
        self._spo: dict[Term, tuple[tuple[Term, Term], ...]] = {}
        self._ops: dict[Term, tuple[tuple[Term, Term], ...]] = {}
        self._pso: dict[Term, tuple[tuple[Term, Term], ...]] = {}
        self._names: dict[str, list[Term]] = {}

    # -- ingestion ---------------------------------------------------------

    def add(self, triple: Triple) -> bool:
        if self._frozen:
            raise StoreFrozenError("store is finalized")
        if triple in self._triples:
            return False
        self._triples.add(triple)
        return True

    def ingest(self, lines: Iterable[str], strict: bool = False) -> IngestReport:
        report = IngestReport()
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                triple = parse_triple_line(nfc(line))
            except ValueError as exc:
                if strict:
                    raise MalformedLineError(lineno, line, str(exc)) from exc
                report.skipped.append((lineno, str(exc)))
                continue
            report.parsed += 1
            if self.add(triple):
                report.added += 1
            else:
                report.duplicates += 1
        if report.skipped:
            logger.warning("skipped %d malformed triple lines", len(report.skipped))
        return report

    def finalize(self) -> "KnowledgeStore":
        if self._frozen:
            return self
        spo: dict[Term, list[tuple[Term, Term]]] = defaultdict(list)
        ops: dict[Term, list[tuple[Term, Term]]] = defaultdict(list)
        pso: dict[Term, list[tuple[Term, Term]]] = defaultdict(list)
        for s, p, o in self._triples:
            spo[s].append((p, o))
            ops[o].append((p, s))
            pso[p].append((s, o))
        self._spo = {k: tuple(sorted(v)) for k, v in spo.items()}
        self._ops = {k: tuple(sorted(v)) for k, v in ops.items()}
        self._pso = {k: tuple(sorted(v)) for k, v in pso.items()}
        names: dict[str, set[Term]] = defaultdict(set)
        for term in list(self._spo) + list(self._ops):
            names[term.value].add(term)
        self._names = {k: sorted(v) for k, v in names.items()}
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _require_frozen(self) -> None:
        if not self._frozen:
            raise RuntimeError("store must be finalized before querying")

    # -- read API ----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: object) -> bool:
        return triple in self._triples

    def triples(self) -> list[Triple]:
        return sorted(self._triples)

    def neighbors_out(self, entity: Term) -> list[tuple[Term, Term]]:
        self._require_frozen()
        return list(self._spo.get(entity, ()))

    def neighbors_in(self, term: Term) -> list[tuple[Term, Term]]:
        self._require_frozen()
        return list(self._ops.get(term, ()))

    def out_degree(self, entity: Term) -> int:
        self._require_frozen()
        return len(self._spo.get(entity, ()))

    def lookup_name(self, name: str) -> list[Term]:
        """Terms (entity or literal) in subject/object position with this value."""
        self._require_frozen()
        return list(self._names.get(nfc(name), ()))

    def has_term(self, term: Term) -> bool:
        self._require_frozen()
        return term in self._spo or term in self._ops

    def entity_names(self) -> Iterator[str]:
        self._require_frozen()
        for name, terms in self._names.items():
            if any(not t.is_literal for t in terms):
                yield name

    def predicates(self) -> list[Term]:
        self._require_frozen()
        return sorted(self._pso)

    def match(self, s: Optional[Term], p: Optional[Term], o: Optional[Term]) -> Iterator[Triple]:
        """Yield stored triples matching the pattern; ``None`` is a wildcard."""
        self._require_frozen()
        if s is not None:
            for pp, oo in self._spo.get(s, ()):
                if (p is None or pp == p) and (o is None or oo == o):
                    yield Triple(s, pp, oo)
        elif o is not None:
            for pp, ss in self._ops.get(o, ()):
                if p is None or pp == p:
                    yield Triple(ss, pp, o)
        elif p is not None:
            for ss, oo in self._pso.get(p, ()):
                yield Triple(ss, p, oo)
        else:
            yield from self.triples()

    def estimate(self, s: Optional[Term], p: Optional[Term], o: Optional[Term]) -> int:
        """Upper bound on the number of matches, from index sizes only."""
        self._require_frozen()
        sizes = []
        if s is not None:
            sizes.append(len(self._spo.get(s, ())))
        if o is not None:
            sizes.append(len(self._ops.get(o, ())))
        if p is not None:
            sizes.append(len(self._pso.get(p, ())))
        return min(sizes) if sizes else len(self._triples)


def ingest_triples(lines: Iterable[str], strict: bool = False,
                   store: Optional[KnowledgeStore] = None) -> tuple[KnowledgeStore, IngestReport]:
    store = store if store is not None else KnowledgeStore()
    report = store.ingest(lines, strict=strict)
    return store, report


def load_store(path: str | Path, strict: bool = False) -> tuple[KnowledgeStore, IngestReport]:
    with open(path, encoding="utf-8") as fh:
        store, report = ingest_triples(fh, strict=strict)
    store.finalize()
    return store, report


# -- mention lexicon -------------------------------------------------------

def _entity_from_field(text: str) -> Term:
    text = text.strip()
    if text.startswith("<") and text.endswith(">"):
        text = text[1:-1]
    return Entity(text)


class MentionLexicon:
    """mention -> {entity: popularity count}, plus the reverse mapping."""

    def __init__(self) -> None:
        self._forward: dict[str, dict[Term, int]] = defaultdict(dict)
        self._reverse: dict[Term, set[str]] = defaultdict(set)

    def add(self, mention: str, entity: Term, count: int = 1) -> None:
        mention = nfc(mention)
        bucket = self._forward[mention]
        bucket[entity] = bucket.get(entity, 0) + count
        self._reverse[entity].add(mention)

    def entities(self, mention: str) -> list[tuple[Term, int]]:
        return sorted(self._forward.get(nfc(mention), {}).items())

    def mentions(self, entity: Term) -> list[str]:
        return sorted(self._reverse.get(entity, ()))

    def keys(self) -> Iterator[str]:
        return iter(self._forward)

    def __contains__(self, mention: object) -> bool:
        return isinstance(mention, str) and nfc(mention) in self._forward

    def __len__(self) -> int:
        return sum(len(v) for v in self._forward.values())

    def pairs(self) -> Iterator[tuple[str, Term, int]]:
        for mention in sorted(self._forward):
            for entity, count in sorted(self._forward[mention].items()):
                yield mention, entity, count


def ingest_mentions(lines: Iterable[str],
                    lexicon: Optional[MentionLexicon] = None) -> tuple[MentionLexicon, IngestReport]:
    lexicon = lexicon if lexicon is not None else MentionLexicon()
    report = IngestReport()
    for lineno, line in enumerate(lines, 1):
        line = nfc(line.rstrip("\r\n"))
        if not line.strip():
            continue
        fields = line.split("\t")
        try:
            if len(fields) < 2 or not fields[0] or not fields[1]:
                raise ValueError("expected mention TAB entity [TAB count]")
            count = int(fields[2]) if len(fields) > 2 and fields[2].strip() else 1
            entity = _entity_from_field(fields[1])
        except ValueError as exc:
            report.skipped.append((lineno, str(exc)))
            continue
        report.parsed += 1
        lexicon.add(fields[0], entity, count)
    return lexicon, report


# -- dictionaries ----------------------------------------------------------

DEFAULT_INTERROGATIVES = (
    "who", "what", "where", "how", "how much", "how many",
    "谁", "什么", "哪", "哪里", "多少", "几", "怎么",
)


@dataclass
class Dictionaries:
    stop_words: set[str] = field(default_factory=set)
    financial_terms: set[str] = field(default_factory=set)
    interrogatives: list[str] = field(default_factory=lambda: list(DEFAULT_INTERROGATIVES))
    gender_lexicon: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.stop_words = {nfc(w) for w in self.stop_words}
        self.financial_terms = {nfc(w) for w in self.financial_terms}
        self.interrogatives = [nfc(w) for w in self.interrogatives]
        self.gender_lexicon = {nfc(k): v for k, v in self.gender_lexicon.items()}
        overlap = self.stop_words & self.financial_terms
        if overlap:
            raise ValueError(f"stop words and financial terms overlap: {sorted(overlap)}")
        bad = {v for v in self.gender_lexicon.values()} - {"male", "female"}
        if bad:
            raise ValueError(f"gender lexicon values must be male/female, got {sorted(bad)}")

    @classmethod
    def from_dir(cls, path: str | Path) -> "Dictionaries":
        """Read ``stopwords.txt``, ``financial.txt``, ``interrogatives.txt`` and
        ``gender.tsv`` from a directory; missing files fall back to defaults."""
        path = Path(path)

        def words(name: str) -> Optional[list[str]]:
            f = path / name
            if not f.exists():
                return None
            return [w.strip() for w in f.read_text(encoding="utf-8").splitlines() if w.strip()]

        gender: dict[str, str] = {}
        g = path / "gender.tsv"
        if g.exists():
            for line in g.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    keyword, value = line.split("\t")
                    gender[keyword.strip()] = value.strip()
        interrogatives = words("interrogatives.txt")
        return cls(
            stop_words=set(words("stopwords.txt") or ()),
            financial_terms=set(words("financial.txt") or ()),
            interrogatives=interrogatives if interrogatives is not None else list(DEFAULT_INTERROGATIVES),
            gender_lexicon=gender,
        )
