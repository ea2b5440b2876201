"""Command-line interface: ``kbqa load|ask|eval|convert|export-pairs``."""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import Config
from .evaluation import ablate, convert_ccks, evaluate, export_pairs, load_qa
from .pipeline import Pipeline
from .relation_ranker import write_pairs
from .store import Dictionaries, KnowledgeStore, MentionLexicon, ingest_mentions, ingest_triples

log = logging.getLogger("kbqa")

SNAPSHOT_KB = "kb.tsv"
SNAPSHOT_MENTIONS = "mentions.tsv"
SNAPSHOT_DICTS = "dicts"


def _add_resources(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--kb", help="triples file (<s>\\t<p>\\t<o>|\"o\")")
    p.add_argument("--mentions", help="mention file (mention\\tentity[\\tcount])")
    p.add_argument("--dicts", help="directory with stopwords.txt, financial.txt, gender.tsv, ...")
    p.add_argument("--snapshot", help="directory written by `kbqa load`")
    p.add_argument("--strict", action="store_true", help="abort on malformed triple lines")
    p.add_argument("--config", help="JSON config file")


def _resolve_paths(args) -> tuple[Path, Optional[Path], Optional[Path]]:
    if args.snapshot:
        snap = Path(args.snapshot)
        dicts = snap / SNAPSHOT_DICTS
        return snap / SNAPSHOT_KB, snap / SNAPSHOT_MENTIONS, dicts if dicts.is_dir() else None
    if not args.kb:
        raise SystemExit("error: --kb or --snapshot is required")
    return Path(args.kb), Path(args.mentions) if args.mentions else None, Path(args.dicts) if args.dicts else None


def load_resources(args) -> tuple[KnowledgeStore, MentionLexicon, Dictionaries]:
    kb, mentions, dicts = _resolve_paths(args)
    with open(kb, encoding="utf-8") as fh:
        store, report = ingest_triples(fh, strict=args.strict)
    store.finalize()
    log.info("triples: %s", report)
    lexicon = MentionLexicon()
    if mentions is not None:
        with open(mentions, encoding="utf-8") as fh:
            lexicon, mreport = ingest_mentions(fh)
        log.info("mentions: %s", mreport)
    dictionaries = Dictionaries.from_dir(dicts) if dicts else Dictionaries()
    return store, lexicon, dictionaries


def build_pipeline(args) -> Pipeline:
    store, lexicon, dictionaries = load_resources(args)
    return Pipeline(store, lexicon, dictionaries, Config.load(args.config))


def cmd_load(args) -> int:
    kb, mentions, dicts = _resolve_paths(args)
    store, lexicon, dictionaries = load_resources(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / SNAPSHOT_KB, "w", encoding="utf-8", newline="\n") as fh:
        for t in store.triples():
            fh.write(f"{t.subject.n3()}\t{t.predicate.n3()}\t{t.object.n3()}\n")
    with open(out / SNAPSHOT_MENTIONS, "w", encoding="utf-8", newline="\n") as fh:
        for mention, entity, count in lexicon.pairs():
            fh.write(f"{mention}\t{entity.value}\t{count}\n")
    if dicts:
        shutil.copytree(dicts, out / SNAPSHOT_DICTS, dirs_exist_ok=True)
    stats = {"triples": len(store), "mention_pairs": len(lexicon),
             "entities": sum(1 for _ in store.entity_names()),
             "stop_words": len(dictionaries.stop_words),
             "financial_terms": len(dictionaries.financial_terms)}
    (out / "stats.json").write_text(json.dumps(stats, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(stats, ensure_ascii=False))
    return 0


def cmd_ask(args) -> int:
    pipeline = build_pipeline(args)
    trace = pipeline.answer(args.question)
    if args.explain:
        print(json.dumps(trace.to_dict(), ensure_ascii=False, indent=2))
        return 0 if trace.ok else 1
    if trace.error:
        print(f"error: {trace.error}", file=sys.stderr)
        return 1
    if args.emit_sparql:
        print(trace.query)
        return 0
    for term in trace.answers:
        print(term.n3())
    return 0


def cmd_eval(args) -> int:
    pipeline = build_pipeline(args)
    examples, report = load_qa(args.qa)
    if report.skipped:
        for lineno, reason in report.skipped:
            print(f"skipped line {lineno}: {reason}", file=sys.stderr)
    if args.ablate:
        rows = ablate(examples, pipeline)
        width = max(len(name) for name, _ in rows)
        print(f"{'Score':<{width}}  accuracy")
        for name, acc in rows:
            print(f"{name:<{width}}  {acc:.1%}")
        return 0
    result = evaluate(examples, pipeline)
    if args.json:
        print(json.dumps(result.as_dict(), ensure_ascii=False, indent=2))
        return 0
    print(f"questions     {len(result.results)}")
    print(f"macro F1      {result.macro_f1:.4f}")
    print(f"accuracy      {result.accuracy:.4f}")
    if result.topic_accuracy is not None:
        print(f"topic acc.    {result.topic_accuracy:.4f}")
    if result.coverage:
        c = result.coverage
        print(f"hop coverage  one={c.one_hop} two={c.two_hop} total={c.total} ratio={c.ratio:.4f}")
    for name in ("no-entity", "no-relation", "wrong-entity", "wrong-path", "wrong-answer"):
        print(f"{name:<13} {result.errors.get(name, 0)}")
    return 0


def cmd_convert(args) -> int:
    with open(args.ccks, encoding="utf-8") as fh:
        records = convert_ccks(fh)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} examples to {args.out}")
    return 0


def cmd_export_pairs(args) -> int:
    pipeline = build_pipeline(args)
    examples, _ = load_qa(args.qa)
    skipped: list[str] = []
    pairs = export_pairs(examples, pipeline, seed=args.seed, skipped=skipped)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_pairs(pairs, fh)
    for qid in skipped:
        print(f"skipped {qid}: no gold query", file=sys.stderr)
    print(f"wrote {len(pairs)} pairs to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbqa", description="Question answering over a triple store.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("load", help="ingest resources and write a snapshot directory")
    _add_resources(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_load)

    p = sub.add_parser("ask", help="answer one question")
    _add_resources(p)
    p.add_argument("-q", "--question", required=True)
    p.add_argument("--emit-sparql", action="store_true")
    p.add_argument("--explain", action="store_true", help="print the full trace as JSON")
    p.set_defaults(func=cmd_ask)

    p = sub.add_parser("eval", help="evaluate on a JSON-lines QA file")
    _add_resources(p)
    p.add_argument("--qa", required=True)
    p.add_argument("--ablate", action="store_true", help="topic-entity score ablation table")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("convert", help="convert the CCKS text layout to JSON-lines")
    p.add_argument("--ccks", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("export-pairs", help="write similarity training pairs as TSV")
    _add_resources(p)
    p.add_argument("--qa", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_export_pairs)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
