"""Mention span extraction, tagger fusion, stop-word handling and entity linking."""

from __future__ import annotations

import importlib
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

from .store import Dictionaries, KnowledgeStore, MentionLexicon, Term, nfc
from .text import ISO_DATE

LABELS = ("LOC", "ORG", "PER", "TIME", "n", "nr", "ns", "nt", "nw", "DICT_FIN", "DICT_STOP")

# most specific first
SPECIFICITY = ("nr", "nt", "ns", "nw", "PER", "ORG", "LOC", "TIME", "DICT_FIN", "n", "DICT_STOP")
_RANK = {label: i for i, label in enumerate(SPECIFICITY)}


@dataclass(frozen=True, order=True)
class TaggedSpan:
    start: int
    end: int
    surface: str
    label: str

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span [{self.start}, {self.end})")
        if len(self.surface) != self.end - self.start:
            raise ValueError("surface length does not match offsets")
        if self.label not in _RANK:
            raise ValueError(f"unknown label {self.label!r}")


@dataclass(frozen=True)
class LinkedCandidate:
    span: TaggedSpan
    mention: str
    entity: Term
    source: str  # "lexicon" | "kb-exact"

    @property
    def label(self) -> str:
        return self.span.label


class Tagger(Protocol):
    name: str

    def tag(self, question: str) -> list[TaggedSpan]: ...


def _min_length(key: str) -> int:
    return 3 if key.isascii() else 2


def find_all(text: str, word: str) -> Iterable[int]:
    start = text.find(word)
    while start != -1:
        yield start
        start = text.find(word, start + 1)


class LexiconTagger:
    """Greedy left-to-right longest match over mention keys and entity names."""

    name = "lexicon"

    def __init__(self, keys: Iterable[str], label: str = "n"):
        self.keys = {nfc(k) for k in keys if len(k) >= _min_length(k)}
        self.max_len = max((len(k) for k in self.keys), default=0)
        self.label = label

    @classmethod
    def from_resources(cls, lexicon: MentionLexicon, store: KnowledgeStore) -> "LexiconTagger":
        return cls(list(lexicon.keys()) + list(store.entity_names()))

    def tag(self, question: str) -> list[TaggedSpan]:
        spans = []
        i, n = 0, len(question)
        while i < n:
            for length in range(min(self.max_len, n - i), 0, -1):
                surface = question[i:i + length]
                if surface in self.keys:
                    spans.append(TaggedSpan(i, i + length, surface, self.label))
                    i += length
                    break
            else:
                i += 1
        return spans


class DateTagger:
    """Tags ISO ``YYYY-MM-DD`` substrings; run after date normalization."""

    name = "date"

    def tag(self, question: str) -> list[TaggedSpan]:
        return [TaggedSpan(m.start(), m.end(), m.group(), "TIME") for m in ISO_DATE.finditer(question)]


class FunctionTagger:
    """Wraps a plain ``question -> spans`` function as a tagger."""

    def __init__(self, name: str, fn: Callable[[str], list[TaggedSpan]]):
        self.name = name
        self.fn = fn

    def tag(self, question: str) -> list[TaggedSpan]:
        return list(self.fn(question))


def resolve_tagger(spec: str, lexicon: MentionLexicon, store: KnowledgeStore) -> Tagger:
    """Look up a tagger by registry name or ``module:attribute`` import path."""
    if spec == "lexicon":
        return LexiconTagger.from_resources(lexicon, store)
    if spec == "date":
        return DateTagger()
    module_name, _, attr = spec.partition(":")
    if not attr:
        raise ValueError(f"unknown tagger {spec!r}")
    obj = getattr(importlib.import_module(module_name), attr)
    if isinstance(obj, type):
        obj = obj()
    if hasattr(obj, "tag"):
        return obj
    return FunctionTagger(spec, obj)


def dictionary_spans(question: str, words: Iterable[str], label: str) -> list[TaggedSpan]:
    spans = []
    for word in words:
        for start in find_all(question, word):
            spans.append(TaggedSpan(start, start + len(word), word, label))
    return spans


def merge_spans(spans: Iterable[TaggedSpan]) -> list[TaggedSpan]:
    """Collapse spans with identical offsets to the most specific label."""
    best: dict[tuple[int, int], TaggedSpan] = {}
    for span in spans:
        key = (span.start, span.end)
        if key not in best or _RANK[span.label] < _RANK[best[key].label]:
            best[key] = span
    return sorted(best.values())


def extract_spans(question: str, taggers: Sequence[Tagger], dictionaries: Dictionaries) -> list[TaggedSpan]:
    """Union of tagger output and financial-dictionary hits, minus stop words."""
    spans: list[TaggedSpan] = []
    for tagger in taggers:
        for span in tagger.tag(question):
            if question[span.start:span.end] != span.surface:
                raise ValueError(f"tagger {tagger.name} produced a span not matching the question")
            spans.append(span)
    spans.extend(dictionary_spans(question, dictionaries.financial_terms, "DICT_FIN"))
    return [s for s in merge_spans(spans) if s.surface not in dictionaries.stop_words]


def apply_stopword_fallback(question: str, spans: list[TaggedSpan],
                            dictionaries: Dictionaries) -> list[TaggedSpan]:
    """Re-admit stop-word matches when nothing else was found."""
    if spans:
        return spans
    return merge_spans(dictionary_spans(question, dictionaries.stop_words, "DICT_STOP"))


def link(spans: Sequence[TaggedSpan], lexicon: MentionLexicon, store: KnowledgeStore) -> list[LinkedCandidate]:
    out: list[LinkedCandidate] = []
    seen: set[tuple[TaggedSpan, Term]] = set()
    for span in spans:
        entities = [e for e, _ in lexicon.entities(span.surface)]
        source = "lexicon"
        if not entities:
            entities = store.lookup_name(span.surface)
            source = "kb-exact"
        for entity in entities:
            if (span, entity) in seen:
                continue
            seen.add((span, entity))
            out.append(LinkedCandidate(span, span.surface, entity, source))
    return out
