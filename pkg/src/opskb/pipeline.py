"""End-to-end run: corpus directory in, knowledge tables and a manifest out."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .ast_front import DEFAULT_TIMEOUT, ParseFailure, parse_source
from .chains import ChainRecord, EmptyChainError, build_chain, parse_chain, serialize, write_chains_csv
from .corpus import DEFAULT_MAX_BYTES, ScriptRecord, Stage, clean, ingest, write_jsonl
from .errors import ConfigError, InputError, StageFailure
from .evalkit import write_relation_sets
from .miner import (
    MinerConfig,
    TxnMode,
    build_relation_transactions,
    build_transactions,
    derive_rules,
    mine_with_optimizations,
    write_itemsets_csv,
    write_rules_csv,
)
from .relations import ParallelRule, ScriptStructure, aggregate, classify_relations, write_relations_csv
from .retrieval import attach_vectors, entries_from_tables, get_embedder, save_kb
from .syntax_kb import load_syntax, write_syntax_csv

__all__ = ["PipelineConfig", "RunManifest", "ScriptResult", "analyze_script", "analyze_many", "run_pipeline"]

log = logging.getLogger(__name__)

@dataclass(frozen=True)
class ScriptResult:
    """Everything extracted from one script, as plain picklable data."""

    script_id: str
    failure: str | None = None
    relations: tuple[tuple[str, str, str], ...] = ()
    chain: str | None = None
    operators: tuple[str, ...] = ()
    names: tuple[tuple[str, str], ...] = ()  # (canonical, short) per occurrence


def analyze_script(text: str, script_id: str, parallel_rule: str, timeout: float = DEFAULT_TIMEOUT) -> ScriptResult:
    tree = parse_source(text, script_id, timeout)
    if isinstance(tree, ParseFailure):
        return ScriptResult(script_id, failure=tree.reject_reason)
    st = ScriptStructure(tree, parallel_rule)
    rels = tuple((a, b, r.value) for a, b, r in classify_relations(tree, structure=st))
    try:
        chain = serialize(build_chain(tree, structure=st))
    except EmptyChainError:
        chain = None
    occs = st.occurrences
    return ScriptResult(
        script_id,
        relations=rels,
        chain=chain,
        operators=tuple(o.canonical_name for o in occs if o.named),
        names=tuple((o.canonical_name, o.short_name) for o in occs),
    )


def _analyze_args(args: tuple[str, str, str, float]) -> ScriptResult:
    return analyze_script(*args)


def analyze_many(
    records: Iterable[ScriptRecord],
    parallel_rule: str = ParallelRule.DATAFLOW.value,
    timeout: float = DEFAULT_TIMEOUT,
    threads: int = 1,
) -> list[ScriptResult]:
    """Analyze records in input order; ``threads > 1`` uses worker processes."""
    jobs = [(r.text, r.script_id, ParallelRule(parallel_rule).value, timeout) for r in records]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_analyze_args, jobs, chunksize=max(1, len(jobs) // (threads * 8))))
    return [_analyze_args(j) for j in jobs]


@dataclass
class PipelineConfig:
    corpus: str
    syntax: str
    out: str
    min_support: float = 0.05
    start_support: float | None = None
    min_confidence: float = 0.0
    parallel_rule: str = ParallelRule.DATAFLOW.value
    txn_mode: str = TxnMode.SCRIPT.value
    threads: int = 1
    extensions: tuple[str, ...] = (".js",)
    max_bytes: int = DEFAULT_MAX_BYTES
    dedup: bool = False
    timeout: float = DEFAULT_TIMEOUT
    paper_style: bool = False
    build_kb: bool = True

    def check(self) -> MinerConfig:
        try:
            ParallelRule(self.parallel_rule)
            TxnMode(self.txn_mode)
            miner = MinerConfig(min_support=self.min_support, start_support=self.start_support, txn_mode=self.txn_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.max_bytes < 1:
            raise ConfigError("max_bytes must be >= 1")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if not 0 <= self.min_confidence <= 1:
            raise ConfigError("min_confidence must lie in [0, 1]")
        return miner


@dataclass
class RunManifest:
    tool_version: str
    config: dict
    input_digests: dict
    stage_counts: dict = field(default_factory=dict)
    output_digests: dict = field(default_factory=dict)
    timestamp: str = ""

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


class _Outputs:
    """Files are written under a ``.partial`` name and renamed at the end."""

    def __init__(self, out_dir: Path):
        self.dir = out_dir
        self.names: list[str] = []

    def path(self, name: str) -> Path:
        self.names.append(name)
        return self.dir / (name + ".partial")

    def commit(self) -> dict[str, str]:
        digests = {}
        for name in self.names:
            final = self.dir / name
            os.replace(self.dir / (name + ".partial"), final)
            digests[name] = sha256_file(final)
        return dict(sorted(digests.items()))


def _stage(name: str, fn: Callable, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ConfigError, InputError):
        raise
    except Exception as exc:
        log.error("stage %s failed: %s", name, exc)
        raise StageFailure(name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> RunManifest:
    miner_cfg = cfg.check()
    corpus_dir = Path(cfg.corpus)
    if not corpus_dir.is_dir():
        raise InputError(f"corpus directory not found: {corpus_dir}")
    syntax_path = Path(cfg.syntax)
    if not syntax_path.is_file():
        raise InputError(f"syntax table not found: {syntax_path}")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = _Outputs(out_dir)
    counts: dict[str, int] = {}

    try:
        entries = load_syntax(syntax_path)
    except (OSError, ValueError) as exc:
        raise InputError(f"{syntax_path}: {exc}") from exc
    if syntax_path.suffix.lower() == ".json":
        write_syntax_csv(entries, outputs.path("syntax.csv"))
    else:
        shutil.copyfile(syntax_path, outputs.path("syntax.csv"))
    counts["syntax_entries"] = len(entries)

    records = _stage("ingest", ingest, corpus_dir, cfg.extensions, max_bytes=cfg.max_bytes, dedup=cfg.dedup, workers=cfg.threads)
    counts["ingested"] = len(records)
    records = _stage("clean", clean, records, workers=cfg.threads)
    counts["cleaned"] = sum(r.stage is Stage.CLEANED for r in records)

    def _validate_and_extract():
        results = analyze_many([r for r in records if r.stage is Stage.CLEANED], cfg.parallel_rule, cfg.timeout, cfg.threads)
        by_id = {res.script_id: res for res in results}
        final = []
        for r in records:
            res = by_id.get(r.script_id)
            if res is None:
                final.append(r)
            elif res.failure:
                final.append(r.advance(Stage.REJECTED, reason=res.failure))
            else:
                final.append(r.advance(Stage.VALIDATED))
        return final, [res for res in results if res.failure is None]

    records, results = _stage("validate", _validate_and_extract)
    counts["validated"] = sum(r.stage is Stage.VALIDATED for r in records)
    counts["rejected"] = sum(r.stage is Stage.REJECTED for r in records)
    write_jsonl([r for r in records if r.stage is Stage.REJECTED], outputs.path("rejects.jsonl"))

    def _extract():
        rows = aggregate(res.relations for res in results)
        write_relations_csv(rows, outputs.path("relations.csv"))
        write_relation_sets({res.script_id: res.relations for res in results}, outputs.path("relations_per_script.csv"))
        chains = [ChainRecord(res.script_id, parse_chain(res.chain)) for res in results if res.chain is not None]
        write_chains_csv(chains, outputs.path("chains.csv"), paper_style=cfg.paper_style)
        return rows, chains

    rel_rows, chain_records = _stage("extract", _extract)
    counts["relation_instances"] = sum(len(res.relations) for res in results)
    counts["relations"] = len(rel_rows)
    counts["chains"] = len(chain_records)

    def _mine():
        if miner_cfg.txn_mode is TxnMode.SCRIPT:
            txns = build_transactions((res.script_id, res.operators) for res in results)
        else:
            txns = build_relation_transactions((res.script_id, res.relations) for res in results)
        itemsets = mine_with_optimizations(txns, miner_cfg) if txns else []
        rules = derive_rules(itemsets, cfg.min_confidence)
        write_itemsets_csv(itemsets, outputs.path("itemsets.csv"))
        write_rules_csv(rules, outputs.path("rules.csv"))
        return txns, itemsets, rules

    txns, itemsets, rules = _stage("mine", _mine)
    counts["transactions"] = len(txns)
    counts["itemsets"] = len(itemsets)
    counts["rules"] = len(rules)

    if cfg.build_kb:

        def _build_kb():
            embedder = get_embedder()
            kb = entries_from_tables(
                entries,
                rel_rows,
                itemsets,
                [(c.script_name, serialize(c.chain)) for c in chain_records],
            )
            kb = attach_vectors(kb, embedder)
            save_kb(kb, outputs.path("kb.jsonl"), embedder.tag)
            return len(kb)

        counts["kb_entries"] = _stage("build-kb", _build_kb)

    manifest = RunManifest(
        tool_version=__version__,
        config={k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(cfg).items()},
        input_digests=_input_digests(records, syntax_path),
        stage_counts=counts,
    )
    manifest.output_digests = outputs.commit()
    manifest.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    with open(out_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _input_digests(records: Sequence[ScriptRecord], syntax_path: Path) -> dict:
    scripts = {r.script_id: sha256_file(r.source_path) for r in records}
    combined = hashlib.sha256()
    for sid in sorted(scripts):
        combined.update(f"{sid}\0{scripts[sid]}\n".encode("utf-8"))
    return {"syntax": sha256_file(syntax_path), "corpus": combined.hexdigest(), "scripts": dict(sorted(scripts.items()))}
