"""Command-line entry point.

One binary, subcommand style: parse | chunk | build-dataset | extract |
evaluate | gen-corpus. Every subcommand is file-in/file-out with no hidden
state. Flags can be pre-set in a JSON config file (``--config``); explicit
flags win over the config, which wins over built-in defaults.

Exit codes: 0 success, 1 domain error (machine-readable JSON on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from .chunking import DEFAULT_SEGMENT_LIMIT, chunk
from .dataset import (
    DEFAULT_P_ABSENT,
    DEFAULT_P_PRESENT_MISS,
    QADatasetBuilder,
    load_annotations,
    load_catalog,
    save_annotations,
    save_catalog,
    write_squad_json,
)
from .doctree import HEADING_FORMATS, MARKDOWN, Node, parse_document
from .errors import ExtractionAborted, KpqaError
from .evaluation import evaluate, format_report
from .extraction import ExtractionResult, extract
from .readers import ExternalProcessReader, LexicalReader, OracleReader, SpanReader

READER_ENV_VAR = "KPQA_READER"
DOC_SUFFIXES = (".txt", ".md")

logger = logging.getLogger(__name__)


def _node_to_dict(node: Node) -> dict:
    out: dict = {"kind": node.kind, "text": node.text, "char_offset": node.char_offset}
    if node.kind == "heading":
        out["level"] = node.level
        out["children"] = [_node_to_dict(child) for child in node.children]
    return out


def _read_text(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _collect_documents(paths: Sequence[str]) -> dict[str, str]:
    """Load documents from files and/or directories; doc id = file stem."""
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            files.extend(
                sorted(p for p in path.iterdir() if p.suffix in DOC_SUFFIXES)
            )
        else:
            files.append(path)
    documents: dict[str, str] = {}
    for path in files:
        if path.stem in documents:
            raise ValueError(f"duplicate document id {path.stem!r} from {path}")
        documents[path.stem] = _read_text(path)
    return documents


def _write_or_print(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def _make_reader(spec: str, catalog) -> SpanReader:
    if spec == "lexical":
        return LexicalReader()
    if spec.startswith("oracle:"):
        return OracleReader.from_gold(catalog, load_annotations(spec[len("oracle:"):]))
    if spec.startswith("external:"):
        return ExternalProcessReader(spec[len("external:"):])
    raise ValueError(
        f"unknown reader {spec!r}; expected lexical, oracle:FILE, or external:CMD"
    )


def _merged_options(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < explicit flags."""
    options = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
        unknown = set(config) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        options.update(config)
    for key in defaults:
        if hasattr(args, key):
            options[key] = getattr(args, key)
    return options


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with flag defaults (flags win)")


# per-subcommand defaults, also the set of config-file keys each accepts
_PARSE_DEFAULTS = {"format": MARKDOWN, "out": None}
_CHUNK_DEFAULTS = {"limit": DEFAULT_SEGMENT_LIMIT, "out": None}
_BUILD_DEFAULTS = {
    "regime": "segment",
    "seed": 0,
    "limit": DEFAULT_SEGMENT_LIMIT,
    "p_absent": DEFAULT_P_ABSENT,
    "p_present_miss": DEFAULT_P_PRESENT_MISS,
    "no_tree_contexts": False,
    "format": MARKDOWN,
    "split_name": "train",
    "out": None,
}
_EXTRACT_DEFAULTS = {
    "reader": None,
    "limit": DEFAULT_SEGMENT_LIMIT,
    "tau": 0.0,
    "workers": 1,
    "out": None,
}
_EVALUATE_DEFAULTS = {"out": None}
_GEN_DEFAULTS = {
    "train_docs": None,
    "test_docs": None,
    "catalog_size": None,
    "avg_kps_per_doc": None,
    "seed": None,
    "distractor_density": None,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpqa",
        description="Knowledge-point extraction from clause documents via extractive QA",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    sup = argparse.SUPPRESS

    p = sub.add_parser("parse", help="parse a document into its tree (JSON)")
    p.add_argument("input", help="UTF-8 text file")
    p.add_argument("--format", choices=HEADING_FORMATS, default=sup)
    p.add_argument("--out", default=sup)
    _add_config_flag(p)

    p = sub.add_parser("chunk", help="segment a document (JSON lines)")
    p.add_argument("input", help="UTF-8 text file")
    p.add_argument("--limit", type=int, default=sup)
    p.add_argument("--out", default=sup)
    _add_config_flag(p)

    p = sub.add_parser("build-dataset", help="construct a SQuAD-v2-style dataset")
    p.add_argument("--documents", nargs="+", required=True, help="document files or directories")
    p.add_argument("--catalog", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--regime", choices=("tree", "segment"), default=sup)
    p.add_argument("--seed", type=int, default=sup)
    p.add_argument("--limit", type=int, default=sup)
    p.add_argument("--p-absent", dest="p_absent", type=float, default=sup)
    p.add_argument("--p-present-miss", dest="p_present_miss", type=float, default=sup)
    p.add_argument(
        "--no-tree-contexts",
        dest="no_tree_contexts",
        action="store_true",
        default=sup,
        help="segment regime only: drop the tree-located contexts",
    )
    p.add_argument("--format", choices=HEADING_FORMATS, default=sup)
    p.add_argument("--split-name", dest="split_name", default=sup)
    p.add_argument("--out", default=sup)
    _add_config_flag(p)

    p = sub.add_parser("extract", help="extract knowledge points from documents")
    p.add_argument("documents", nargs="+", help="document files or directories")
    p.add_argument("--catalog", required=True)
    p.add_argument(
        "--reader",
        default=sup,
        help=f"lexical | oracle:FILE | external:CMD (default ${READER_ENV_VAR} or lexical)",
    )
    p.add_argument("--limit", type=int, default=sup)
    p.add_argument("--tau", type=float, default=sup)
    p.add_argument("--workers", type=int, default=sup)
    p.add_argument("--out", default=sup)
    _add_config_flag(p)

    p = sub.add_parser("evaluate", help="score predictions against gold annotations")
    p.add_argument("--pred", required=True, help="extraction results JSON")
    p.add_argument("--gold", required=True, help="gold annotations JSON")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", default=sup)
    _add_config_flag(p)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus")
    p.add_argument("--spec", help="JSON file with corpus spec fields")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--train-docs", dest="train_docs", type=int, default=sup)
    p.add_argument("--test-docs", dest="test_docs", type=int, default=sup)
    p.add_argument("--catalog-size", dest="catalog_size", type=int, default=sup)
    p.add_argument("--avg-kps-per-doc", dest="avg_kps_per_doc", type=int, default=sup)
    p.add_argument("--seed", type=int, default=sup)
    p.add_argument("--distractor-density", dest="distractor_density", type=float, default=sup)
    _add_config_flag(p)

    return parser


def _cmd_parse(args: argparse.Namespace) -> int:
    opts = _merged_options(args, _PARSE_DEFAULTS)
    tree = parse_document(_read_text(args.input), opts["format"], source_id=Path(args.input).stem)
    payload = {
        "source_id": tree.source_id,
        "synthetic_root": tree.synthetic_root,
        "root": _node_to_dict(tree.root),
    }
    _write_or_print(json.dumps(payload, ensure_ascii=False, indent=1), opts["out"])
    return 0


def _cmd_chunk(args: argparse.Namespace) -> int:
    opts = _merged_options(args, _CHUNK_DEFAULTS)
    segments = chunk(_read_text(args.input), opts["limit"])
    lines = [
        json.dumps(
            {"index": seg.index, "start_offset": seg.start_offset, "text": seg.text},
            ensure_ascii=False,
        )
        for seg in segments
    ]
    _write_or_print("\n".join(lines) + ("\n" if lines else ""), opts["out"])
    return 0


def _cmd_build_dataset(args: argparse.Namespace) -> int:
    opts = _merged_options(args, _BUILD_DEFAULTS)
    documents = _collect_documents(args.documents)
    catalog = load_catalog(args.catalog)
    annotations = load_annotations(args.annotations)
    builder = QADatasetBuilder(
        regime=opts["regime"],
        limit=opts["limit"],
        p_absent=opts["p_absent"],
        p_present_miss=opts["p_present_miss"],
        seed=opts["seed"],
        include_tree_contexts=not opts["no_tree_contexts"],
        heading_format=opts["format"],
    )
    examples = builder.build(documents, catalog, annotations)
    if not opts["out"]:
        raise ValueError("build-dataset requires --out")
    write_squad_json(examples, opts["split_name"], opts["out"])
    logger.info("built %d examples (%s regime)", len(examples), opts["regime"])
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    opts = _merged_options(args, _EXTRACT_DEFAULTS)
    documents = _collect_documents(args.documents)
    catalog = load_catalog(args.catalog)
    reader_spec = opts["reader"] or os.environ.get(READER_ENV_VAR) or "lexical"
    reader = _make_reader(reader_spec, catalog)
    try:
        results = []
        for document_id, text in documents.items():
            results.append(
                extract(
                    text,
                    catalog,
                    reader,
                    limit=opts["limit"],
                    tau=opts["tau"],
                    document_id=document_id,
                    n_workers=opts["workers"],
                ).to_dict()
            )
    finally:
        reader.close()
    _write_or_print(json.dumps(results, ensure_ascii=False, indent=1), opts["out"])
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    opts = _merged_options(args, _EVALUATE_DEFAULTS)
    with open(args.pred, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = [raw]
    results = [ExtractionResult.from_dict(item) for item in raw]
    gold = load_annotations(args.gold)
    catalog = load_catalog(args.catalog)
    report = evaluate(results, gold, catalog)
    payload = json.dumps(report.to_dict(), ensure_ascii=False, indent=1)
    if opts["out"]:
        Path(opts["out"]).write_text(payload, encoding="utf-8")
        print(format_report(report))
    else:
        print(payload)
        print(format_report(report), file=sys.stderr)
    return 0


def _cmd_gen_corpus(args: argparse.Namespace) -> int:
    opts = _merged_options(args, _GEN_DEFAULTS)
    fields = {}
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            fields.update(json.load(fh))
    flag_to_field = {
        "train_docs": "n_train_docs",
        "test_docs": "n_test_docs",
        "catalog_size": "catalog_size",
        "avg_kps_per_doc": "avg_kps_per_doc",
        "seed": "seed",
        "distractor_density": "distractor_density",
    }
    for flag, field in flag_to_field.items():
        if opts[flag] is not None:
            fields[field] = opts[flag]
    generated = corpus_mod.generate_corpus(corpus_mod.CorpusSpec(**fields))

    out_dir = Path(args.out)
    docs_dir = out_dir / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    for document_id, text in generated.documents.items():
        (docs_dir / f"{document_id}.txt").write_text(text, encoding="utf-8")
    save_catalog(generated.catalog, out_dir / "catalog.json")
    save_annotations(generated.annotations_train, out_dir / "annotations_train.json")
    save_annotations(generated.annotations_test, out_dir / "annotations_test.json")
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(generated.manifest, fh, ensure_ascii=False, indent=1)
    logger.info(
        "wrote corpus to %s (%d train docs, %d test docs)",
        out_dir, len(generated.documents_train), len(generated.documents_test),
    )
    return 0


_COMMANDS = {
    "parse": _cmd_parse,
    "chunk": _cmd_chunk,
    "build-dataset": _cmd_build_dataset,
    "extract": _cmd_extract,
    "evaluate": _cmd_evaluate,
    "gen-corpus": _cmd_gen_corpus,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (KpqaError, ValueError, OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        error = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ExtractionAborted):
            # surface the underlying reader failure by name, plus what finished
            if exc.cause is not None:
                error["error"] = type(exc.cause).__name__
            error["completed_kps"] = sorted(exc.partial.answers)
        print(json.dumps(error, ensure_ascii=False), file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
