"""Bundled sample resources.

``zh`` is a small Chinese knowledge base with twenty annotated questions
covering every path shape; ``en`` is a tiny English store used for the
worked query examples.
"""

from __future__ import annotations

from pathlib import Path

from .config import Config
from .evaluation import QaExample, load_qa
from .pipeline import Pipeline
from .store import Dictionaries, KnowledgeStore, MentionLexicon, ingest_mentions, ingest_triples

DATA = Path(__file__).parent / "data"
FIXTURES = ("zh", "en")


def fixture_dir(name: str) -> Path:
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}; expected one of {FIXTURES}")
    return DATA / name


def fixture_store(name: str = "zh") -> KnowledgeStore:
    with open(fixture_dir(name) / "kb.tsv", encoding="utf-8") as fh:
        store, _ = ingest_triples(fh, strict=True)
    return store.finalize()


def fixture_lexicon(name: str = "zh") -> MentionLexicon:
    path = fixture_dir(name) / "mentions.tsv"
    if not path.exists():
        return MentionLexicon()
    with open(path, encoding="utf-8") as fh:
        lexicon, _ = ingest_mentions(fh)
    return lexicon


def fixture_dictionaries(name: str = "zh") -> Dictionaries:
    path = fixture_dir(name) / "dicts"
    return Dictionaries.from_dir(path) if path.is_dir() else Dictionaries()


def fixture_questions(name: str = "zh") -> list[QaExample]:
    examples, _ = load_qa(fixture_dir(name) / "qa.jsonl")
    return examples


def fixture_pipeline(name: str = "zh", config: Config | None = None) -> Pipeline:
    return Pipeline(fixture_store(name), fixture_lexicon(name), fixture_dictionaries(name), config or Config())
