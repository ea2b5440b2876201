"""Question answering over a knowledge base of triples.

Typical use::

    from kbqa import fixtures
    pipeline = fixtures.fixture_pipeline()
    trace = pipeline.answer("莫妮卡·贝鲁奇的代表作是什么？")
    print(trace.query, trace.answers)
"""

from .config import Config
from .pipeline import AnswerTrace, Pipeline
from .sparql import QueryAst, execute, parse, serialize
from .store import Dictionaries, Entity, KnowledgeStore, Literal, MentionLexicon, Term, Triple

__all__ = [
    "AnswerTrace", "Config", "Dictionaries", "Entity", "KnowledgeStore", "Literal", "MentionLexicon",
    "Pipeline", "QueryAst", "Term", "Triple", "execute", "parse", "serialize",
]

__version__ = "0.1.0"
