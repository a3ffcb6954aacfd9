"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 input error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_STAGE = 4

log = logging.getLogger("opskb")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep the message short
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return v


def _read_records(path: str):
    from .corpus import read_jsonl

    return read_jsonl(path)


def _write_json(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- subcommands -----------------------------------------------------------------


def cmd_ingest(args) -> int:
    from .corpus import corpus_stats, ingest, write_jsonl

    exts = tuple(args.ext) if args.ext else (".js",)
    records = ingest(args.directory, exts, max_bytes=args.max_bytes, dedup=args.dedup, workers=args.threads)
    write_jsonl(records, args.out)
    print(json.dumps(corpus_stats(records).to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_clean(args) -> int:
    from .corpus import clean, write_jsonl

    records = clean(_read_records(args.corpus), workers=args.threads)
    n = write_jsonl(records, args.out)
    print(f"{n} records written to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .ast_front import ParseFailure, to_json, validate
    from .corpus import Stage, write_jsonl

    records = _read_records(args.cleaned)
    ok, rejected = [], []
    ast_dir = Path(args.ast_dir) if args.ast_dir else None
    if ast_dir:
        ast_dir.mkdir(parents=True, exist_ok=True)
    for rec in records:
        if rec.stage is not Stage.CLEANED:
            (rejected if rec.stage is Stage.REJECTED else ok).append(rec)
            continue
        rec, result = validate(rec, timeout=args.timeout)
        if isinstance(result, ParseFailure):
            rejected.append(rec)
            continue
        ok.append(rec)
        if ast_dir:
            name = rec.script_id.replace("/", "__") + ".ast.json"
            (ast_dir / name).write_text(to_json(result), encoding="utf-8")
    write_jsonl(ok, args.out)
    if args.rejects:
        write_jsonl(rejected, args.rejects)
    print(json.dumps({"validated": len(ok), "rejected": len(rejected)}, sort_keys=True))
    return EXIT_OK


def cmd_extract(args) -> int:
    from .chains import ChainRecord, parse_chain, write_chains_csv
    from .corpus import Stage
    from .evalkit import write_relation_sets
    from .miner import write_txns_jsonl
    from .pipeline import analyze_many
    from .relations import aggregate, write_relations_csv

    records = [r for r in _read_records(args.valid) if r.stage is Stage.VALIDATED]
    results = analyze_many(records, args.parallel_rule, args.timeout, args.threads)
    failed = [r for r in results if r.failure]
    for r in failed:
        log.warning("%s: %s", r.script_id, r.failure)
    results = [r for r in results if not r.failure]
    rows = aggregate(r.relations for r in results)
    write_relations_csv(rows, args.relations)
    if args.per_script:
        write_relation_sets({r.script_id: r.relations for r in results}, args.per_script)
    if args.chains:
        chains = [ChainRecord(r.script_id, parse_chain(r.chain)) for r in results if r.chain]
        write_chains_csv(chains, args.chains, paper_style=args.paper_style)
    if args.txns:
        write_txns_jsonl(((r.script_id, r.operators, r.relations) for r in results), args.txns)
    print(json.dumps({"scripts": len(results), "failed": len(failed), "relations": len(rows)}, sort_keys=True))
    return EXIT_OK


def cmd_mine(args) -> int:
    from .miner import (
        MinerConfig,
        derive_rules,
        fp_growth,
        mine_with_optimizations,
        read_txns_jsonl,
        write_itemsets_csv,
        write_rules_csv,
    )
    from .errors import ConfigError

    try:
        cfg = MinerConfig(
            min_support=args.min_support,
            start_support=args.start_support,
            txn_mode=args.txn_mode,
            low_freq_floor=args.low_freq_floor,
            batch_size=args.batch_size,
            workers=args.threads,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    txns = read_txns_jsonl(args.txns, cfg.txn_mode)
    if not txns:
        itemsets = []
    elif args.plain:
        itemsets = fp_growth(txns, cfg)
    else:
        itemsets = mine_with_optimizations(txns, cfg)
    rules = derive_rules(itemsets, args.min_confidence)
    write_itemsets_csv(itemsets, args.itemsets)
    if args.rules:
        write_rules_csv(rules, args.rules)
    print(json.dumps({"transactions": len(txns), "itemsets": len(itemsets), "rules": len(rules)}, sort_keys=True))
    return EXIT_OK


def cmd_check_names(args) -> int:
    from .corpus import Stage
    from .pipeline import analyze_many
    from .syntax_kb import check_known, load_syntax

    entries = load_syntax(args.syntax)
    records = [r for r in _read_records(args.valid) if r.stage is Stage.VALIDATED]
    names = [n for res in analyze_many(records, timeout=args.timeout, threads=args.threads) for n in res.names]
    report = check_known(names, entries)
    _write_json(report, args.report)
    if args.report:
        print(json.dumps({"known": report["known"], "unknown": len(report["unknown"])}, sort_keys=True))
    return EXIT_OK


def cmd_build_kb(args) -> int:
    from .retrieval import KB_FILE, attach_vectors, get_embedder, save_kb

    entries = _table_entries(Path(args.tables))
    embedder = get_embedder()
    out = Path(args.out or args.tables) / KB_FILE
    save_kb(attach_vectors(entries, embedder), out, embedder.tag)
    print(f"{len(entries)} entries written to {out}")
    return EXIT_OK


def _table_entries(directory: Path):
    from .chains import read_chains_csv
    from .miner import read_itemsets_csv
    from .relations import read_relations_csv
    from .retrieval import entries_from_tables
    from .syntax_kb import load_syntax

    if not directory.is_dir():
        raise FileNotFoundError(f"knowledge-base directory not found: {directory}")

    def maybe(name, reader, default):
        p = directory / name
        return reader(p) if p.is_file() else default

    return entries_from_tables(
        maybe("syntax.csv", load_syntax, []),
        maybe("relations.csv", read_relations_csv, []),
        maybe("itemsets.csv", read_itemsets_csv, []),
        maybe("chains.csv", read_chains_csv, {}),
    )


def cmd_query(args) -> int:
    from .errors import ConsistencyError
    from .retrieval import KB_FILE, LlmClient, assemble_prompt, attach_vectors, build_index, get_embedder, load_kb

    kb_dir = Path(args.kb)
    embedder = get_embedder()
    kb_file = kb_dir / KB_FILE
    if kb_file.is_file():
        entries, tag = load_kb(kb_file)
        if tag is not None and tag != embedder.tag:
            raise ConsistencyError(f"{kb_file} was built with {tag}, current embedder is {embedder.tag}")
    else:
        entries = attach_vectors(_table_entries(kb_dir), embedder)
    index = build_index(entries, embedder.tag)
    hits = index.query(args.text, embedder, k=args.top_k, per_table=args.per_table)
    template = Path(args.template).read_text(encoding="utf-8") if args.template else None
    prompt = assemble_prompt(args.text, hits, index.by_id, template)
    if args.prompt_out:
        Path(args.prompt_out).write_text(prompt, encoding="utf-8")
    for h in hits:
        e = index.by_id[h.entry_id]
        print(f"{h.rank}\t{h.score:.4f}\t{h.entry_id}\t{e.text}")
    if args.generate:
        print(LlmClient().generate(prompt))
    return EXIT_OK


def cmd_eval(args) -> int:
    from .evalkit import evaluate_chains, evaluate_relations, read_relation_sets, write_report

    if args.what == "relations":
        report = evaluate_relations(read_relation_sets(args.pred), read_relation_sets(args.truth))
    else:
        from .chains import read_chains_csv

        report = evaluate_chains(
            read_chains_csv(args.pred),
            read_chains_csv(args.truth),
            ngram_n=args.ngram_n,
            ngram_coef=args.ngram_coef,
            lcs_normalizer=args.lcs_normalizer,
        )
    if args.report:
        write_report(report, args.report)
    print(json.dumps({"mean": report["mean"], "cv": report["cv"]}, sort_keys=True))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    from .pipeline import PipelineConfig, run_pipeline

    cfg = PipelineConfig(
        corpus=args.corpus,
        syntax=args.syntax,
        out=args.out,
        min_support=args.min_support,
        start_support=args.start_support,
        min_confidence=args.min_confidence,
        parallel_rule=args.parallel_rule,
        txn_mode=args.txn_mode,
        threads=args.threads,
        extensions=tuple(args.ext) if args.ext else (".js",),
        max_bytes=args.max_bytes,
        dedup=args.dedup,
        timeout=args.timeout,
        paper_style=args.paper_style,
        build_kb=not args.no_kb,
    )
    manifest = run_pipeline(cfg)
    print(json.dumps(manifest.stage_counts, sort_keys=True))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    from .ast_front import DEFAULT_TIMEOUT
    from .corpus import DEFAULT_MAX_BYTES

    p = _Parser(prog="opskb", description="Build and query an operator knowledge base from Earth Engine scripts.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    threads = argparse.ArgumentParser(add_help=False)
    threads.add_argument("--threads", type=_positive_int, default=1)
    timeout = argparse.ArgumentParser(add_help=False)
    timeout.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="parse timeout per script (s)")
    rule = argparse.ArgumentParser(add_help=False)
    rule.add_argument("--parallel-rule", choices=["dataflow", "intersection"], default="dataflow")
    mining = argparse.ArgumentParser(add_help=False)
    mining.add_argument("--min-support", type=_fraction, default=0.05)
    mining.add_argument("--start-support", type=_fraction, default=None)
    mining.add_argument("--min-confidence", type=float, default=0.0)
    mining.add_argument("--txn-mode", choices=["script", "relation_pairs"], default="script")
    corpus_opts = argparse.ArgumentParser(add_help=False)
    corpus_opts.add_argument("--ext", action="append", help="file extension to load (repeatable, default .js)")
    corpus_opts.add_argument("--max-bytes", type=_positive_int, default=DEFAULT_MAX_BYTES)
    corpus_opts.add_argument("--dedup", action="store_true", help="reject byte-identical duplicates")

    s = sub.add_parser("ingest", parents=[corpus_opts, threads], help="load scripts from a directory")
    s.add_argument("directory")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("clean", parents=[threads], help="strip comments")
    s.add_argument("corpus")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_clean)

    s = sub.add_parser("validate", parents=[timeout], help="parse cleaned scripts")
    s.add_argument("cleaned")
    s.add_argument("--out", required=True)
    s.add_argument("--rejects")
    s.add_argument("--ast-dir", help="write one JSON syntax tree per script here")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("extract", parents=[rule, timeout, threads], help="relations, chains and transactions")
    s.add_argument("valid")
    s.add_argument("--relations", required=True)
    s.add_argument("--per-script", help="per-script relation sets (evaluation input)")
    s.add_argument("--chains")
    s.add_argument("--paper-style", action="store_true", help="write nesting as '->' (lossy)")
    s.add_argument("--txns", help="transactions for the mine command")
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("mine", parents=[mining, threads], help="frequent itemsets and rules")
    s.add_argument("txns")
    s.add_argument("--itemsets", required=True)
    s.add_argument("--rules")
    s.add_argument("--low-freq-floor", type=_positive_int, default=1)
    s.add_argument("--batch-size", type=_positive_int, default=4096)
    s.add_argument("--plain", action="store_true", help="reference miner without optimizations")
    s.set_defaults(func=cmd_mine)

    s = sub.add_parser("check-names", parents=[timeout, threads], help="operator names missing from the syntax table")
    s.add_argument("valid")
    s.add_argument("--syntax", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_check_names)

    s = sub.add_parser("build-kb", help="embed the tables in a directory into kb.jsonl")
    s.add_argument("tables")
    s.add_argument("--out", help="output directory (default: the tables directory)")
    s.set_defaults(func=cmd_build_kb)

    s = sub.add_parser("query", help="retrieve knowledge and assemble a prompt")
    s.add_argument("text")
    s.add_argument("--kb", required=True)
    s.add_argument("--top-k", type=_positive_int, default=5)
    s.add_argument("--per-table", type=_positive_int)
    s.add_argument("--prompt-out")
    s.add_argument("--template")
    s.add_argument("--generate", action="store_true", help="send the prompt to OPSKB_LLM_URL")
    s.set_defaults(func=cmd_query)

    s = sub.add_parser("eval", help="score predictions against ground truth")
    s.add_argument("what", choices=["relations", "chains"])
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--report")
    s.add_argument("--ngram-n", type=_positive_int, default=3)
    s.add_argument("--ngram-coef", choices=["dice", "jaccard"], default="dice")
    s.add_argument("--lcs-normalizer", choices=["max", "mean"], default="max")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("pipeline", parents=[corpus_opts, mining, rule, timeout, threads], help="run every stage")
    s.add_argument("--corpus", required=True)
    s.add_argument("--syntax", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--paper-style", action="store_true")
    s.add_argument("--no-kb", action="store_true", help="skip embedding the knowledge base")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv: list[str] | None = None) -> int:
    from .errors import ConfigError, ConsistencyError, InputError, StageFailure

    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"opskb: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageFailure as exc:
        print(f"opskb: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (InputError, OSError, ValueError, ConsistencyError) as exc:
        print(f"opskb: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
