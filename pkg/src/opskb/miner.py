"""Frequent operator itemsets and association rules.

Supports are exact :class:`~fractions.Fraction` values. :func:`fp_growth`
is the reference miner; :func:`mine_with_optimizations` adds a
low-frequency pre-filter, batched counting over a sparse item-occurrence
matrix and a descending support schedule, and must return the same result.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import sparse

from .errors import ConsistencyError
from .relations import DYNAMIC

__all__ = [
    "AssocRule",
    "Itemset",
    "MinerConfig",
    "Transaction",
    "TxnMode",
    "build_relation_transactions",
    "build_transactions",
    "derive_rules",
    "fp_growth",
    "mine_with_optimizations",
    "read_itemsets_csv",
    "read_txns_jsonl",
    "write_itemsets_csv",
    "write_rules_csv",
    "write_txns_jsonl",
]

log = logging.getLogger(__name__)

ITEMSETS_HEADER = ["index", "frequent_itemset", "support"]
RULES_HEADER = [
    "index",
    "antecedents",
    "consequents",
    "antecedent_support",
    "consequent_support",
    "support",
    "confidence",
    "lift",
]
ITEM_SEP = ";"


def as_fraction(value) -> Fraction:
    """Exact fraction from a float, string or number; floats go through repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


class TxnMode(str, enum.Enum):
    SCRIPT = "script"
    RELATION_PAIRS = "relation_pairs"


@dataclass(frozen=True)
class Transaction:
    txn_id: str
    items: frozenset[str]


@dataclass(frozen=True)
class Itemset:
    items: tuple[str, ...]  # sorted lexically
    support: Fraction
    count: int = 0

    def sort_key(self):
        return (len(self.items), -self.support, self.items)


@dataclass(frozen=True)
class AssocRule:
    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    antecedent_support: Fraction
    consequent_support: Fraction
    support: Fraction
    confidence: Fraction
    lift: Fraction


@dataclass
class MinerConfig:
    min_support: Fraction = Fraction(1, 20)
    start_support: Fraction | None = None  # None: max(0.20, min_support)
    descent_factor: Fraction = Fraction(1, 2)
    low_freq_floor: int = 1
    batch_size: int = 4096
    txn_mode: TxnMode = TxnMode.SCRIPT
    workers: int = 1
    _start: Fraction = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.min_support = as_fraction(self.min_support)
        self.descent_factor = as_fraction(self.descent_factor)
        self.txn_mode = TxnMode(self.txn_mode)
        if self.start_support is None:
            self._start = max(Fraction(1, 5), self.min_support)
        else:
            self.start_support = as_fraction(self.start_support)
            self._start = self.start_support
        if not (0 < self.min_support <= self._start <= 1):
            raise ValueError("need 0 < min_support <= start_support <= 1")
        if not (0 < self.descent_factor < 1):
            raise ValueError("descent_factor must lie in (0, 1)")
        if self.low_freq_floor < 1:
            raise ValueError("low_freq_floor must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    @property
    def effective_start(self) -> Fraction:
        return self._start

    def support_schedule(self) -> list[Fraction]:
        """Thresholds visited by the descending schedule, ending at min_support."""
        out = []
        s = self._start
        while s > self.min_support:
            out.append(s)
            s *= self.descent_factor
        out.append(self.min_support)
        return out


def min_count(min_support: Fraction, n: int) -> int:
    """Smallest count c with c / n >= min_support."""
    return max(1, math.ceil(min_support * n))


# -- transactions ------------------------------------------------------------


def _name(x) -> str:
    return x if isinstance(x, str) else x.canonical_name


def build_transactions(per_script: Mapping[str, Iterable] | Iterable[tuple[str, Iterable]]) -> list[Transaction]:
    """One transaction per script holding its distinct operator names.

    Values may be operator occurrences or plain names. Dynamic calls are
    ignored and scripts left with no operators are dropped.
    """
    pairs = per_script.items() if isinstance(per_script, Mapping) else per_script
    out = []
    for script_id, ops in pairs:
        items = frozenset(n for n in map(_name, ops) if n != DYNAMIC)
        if not items:
            log.info("%s: no operators, transaction dropped", script_id)
            continue
        out.append(Transaction(str(script_id), items))
    out.sort(key=lambda t: t.txn_id)
    return out


def build_relation_transactions(per_script: Mapping[str, Iterable] | Iterable[tuple[str, Iterable]]) -> list[Transaction]:
    """One transaction per relation instance, holding its two operator names."""
    pairs = per_script.items() if isinstance(per_script, Mapping) else per_script
    out = []
    for script_id, rels in sorted(pairs, key=lambda p: str(p[0])):
        for k, rel in enumerate(rels):
            a, b = rel[0], rel[1]
            out.append(Transaction(f"{script_id}#{k}", frozenset((a, b))))
    return out


# -- FP-tree -----------------------------------------------------------------


class _Node:
    __slots__ = ("item", "count", "parent", "children")

    def __init__(self, item: int, parent: "_Node | None"):
        self.item = item
        self.count = 0
        self.parent = parent
        self.children: dict[int, _Node] = {}


class _FPTree:
    """Items are integer ranks; paths are inserted in ascending rank order."""

    def __init__(self) -> None:
        self.root = _Node(-1, None)
        self.header: dict[int, list[_Node]] = {}

    def insert(self, path: Sequence[int], count: int) -> None:
        node = self.root
        for item in path:
            child = node.children.get(item)
            if child is None:
                child = _Node(item, node)
                node.children[item] = child
                self.header.setdefault(item, []).append(child)
            child.count += count
            node = child


def _build_tree(weighted_paths: Iterable[tuple[Sequence[int], int]], min_cnt: int) -> _FPTree | None:
    paths = list(weighted_paths)
    counts: Counter = Counter()
    for path, c in paths:
        for item in path:
            counts[item] += c
    keep = {i for i, c in counts.items() if c >= min_cnt}
    if not keep:
        return None
    tree = _FPTree()
    for path, c in paths:
        filtered = [i for i in path if i in keep]
        if filtered:
            tree.insert(filtered, c)
    return tree


def _mine_tree(tree: _FPTree, suffix: tuple[int, ...], min_cnt: int, out: dict[tuple[int, ...], int]) -> None:
    # least frequent (highest rank) first
    for item in sorted(tree.header, reverse=True):
        nodes = tree.header[item]
        total = sum(n.count for n in nodes)
        if total < min_cnt:
            continue
        pattern = suffix + (item,)
        out[pattern] = total
        base = []
        for n in nodes:
            path = []
            p = n.parent
            while p is not None and p.item >= 0:
                path.append(p.item)
                p = p.parent
            if path:
                path.reverse()
                base.append((path, n.count))
        sub = _build_tree(base, min_cnt)
        if sub is not None:
            _mine_tree(sub, pattern, min_cnt, out)


def _ranking(counts: Mapping[str, int]) -> list[str]:
    return sorted(counts, key=lambda name: (-counts[name], name))


def _to_itemsets(found: Mapping[tuple[int, ...], int], names: Sequence[str], n: int) -> list[Itemset]:
    out = [Itemset(tuple(sorted(names[i] for i in key)), Fraction(c, n), c) for key, c in found.items()]
    out.sort(key=Itemset.sort_key)
    return out


def fp_growth(txns: Sequence[Transaction], cfg: MinerConfig) -> list[Itemset]:
    """All itemsets with support >= cfg.min_support, canonically sorted."""
    n = len(txns)
    if n == 0:
        raise ValueError("fp_growth needs at least one transaction")
    need = min_count(cfg.min_support, n)
    counts: Counter = Counter()
    for t in txns:
        counts.update(t.items)
    names = _ranking(counts)
    rank = {name: r for r, name in enumerate(names)}
    paths = ((sorted(rank[i] for i in t.items), 1) for t in txns)
    tree = _build_tree(paths, need)
    found: dict[tuple[int, ...], int] = {}
    if tree is not None:
        _mine_tree(tree, (), need, found)
    return _to_itemsets(found, names, n)


# -- optimized path ------------------------------------------------------------


def _occurrence_matrix(txns: Sequence[Transaction]) -> tuple[sparse.csr_matrix, list[str]]:
    vocab = sorted({i for t in txns for i in t.items})
    col = {name: j for j, name in enumerate(vocab)}
    indptr = [0]
    indices: list[int] = []
    for t in txns:
        indices.extend(sorted(col[i] for i in t.items))
        indptr.append(len(indices))
    data = np.ones(len(indices), dtype=np.int64)
    m = sparse.csr_matrix(
        (data, np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(txns), len(vocab)),
    )
    return m, vocab


def _batches(n_rows: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, n_rows)) for s in range(0, n_rows, size)]


def _batch_counts(m: sparse.csr_matrix, bounds: Sequence[tuple[int, int]], workers: int) -> np.ndarray:
    def count(b: tuple[int, int]) -> np.ndarray:
        return np.asarray(m[b[0] : b[1]].sum(axis=0)).ravel()

    total = np.zeros(m.shape[1], dtype=np.int64)
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(count, bounds))
    else:
        parts = [count(b) for b in bounds]
    for p in parts:  # addition commutes, so merge order is irrelevant
        total += p
    return total


def mine_with_optimizations(txns: Sequence[Transaction], cfg: MinerConfig) -> list[Itemset]:
    """Same result as :func:`fp_growth`, built for large transaction sets.

    Item counts come from batches of a sparse transaction-by-item matrix;
    items under ``max(low_freq_floor, min_count)`` are dropped before any
    tree is built; mining proceeds through the descending support
    schedule and the rounds are unioned. Equality with the plain miner
    holds as long as ``low_freq_floor`` does not exceed the min-support
    count.
    """
    n = len(txns)
    if n == 0:
        raise ValueError("mining needs at least one transaction")
    m, vocab = _occurrence_matrix(txns)
    bounds = _batches(n, cfg.batch_size)
    counts = _batch_counts(m, bounds, cfg.workers)
    floor = max(cfg.low_freq_floor, min_count(cfg.min_support, n))
    keep_cols = np.flatnonzero(counts >= floor)
    if keep_cols.size == 0:
        return []
    names = _ranking({vocab[j]: int(counts[j]) for j in keep_cols})
    col = {name: j for j, name in enumerate(vocab)}
    rank_of_col = np.full(len(vocab), -1, dtype=np.int64)
    for r, name in enumerate(names):
        rank_of_col[col[name]] = r
    item_counts = np.array([int(counts[col[name]]) for name in names], dtype=np.int64)

    found: dict[tuple[int, ...], int] = {}
    for threshold in cfg.support_schedule():
        need = max(floor, min_count(threshold, n))
        round_items = set(np.flatnonzero(item_counts >= need).tolist())
        if not round_items:
            continue
        tree = _FPTree()
        for start, stop in bounds:
            block = m[start:stop]
            for r in range(block.shape[0]):
                cols = block.indices[block.indptr[r] : block.indptr[r + 1]]
                ranks = rank_of_col[cols]
                path = sorted(int(x) for x in ranks if x >= 0 and int(x) in round_items)
                if path:
                    tree.insert(path, 1)
        round_found: dict[tuple[int, ...], int] = {}
        _mine_tree(tree, (), need, round_found)
        found.update(round_found)
        log.debug("support %s: %d itemsets", threshold, len(round_found))
    return _to_itemsets(found, names, n)


# -- rules ---------------------------------------------------------------------


def derive_rules(itemsets: Iterable[Itemset], min_confidence=Fraction(0)) -> list[AssocRule]:
    """Every split of every itemset of size >= 2 into antecedent -> consequent."""
    min_confidence = as_fraction(min_confidence)
    sets = list(itemsets)
    support = {frozenset(s.items): s.support for s in sets}

    def lookup(items: Iterable[str]) -> Fraction:
        key = frozenset(items)
        try:
            return support[key]
        except KeyError:
            raise ConsistencyError(f"itemset {sorted(key)} missing: input is not closed under subsets") from None

    rules = []
    for s in sets:
        if len(s.items) < 2:
            continue
        full = s.support
        for k in range(1, len(s.items)):
            for ante in combinations(s.items, k):
                cons = tuple(i for i in s.items if i not in ante)
                sa = lookup(ante)
                sc = lookup(cons)
                conf = full / sa
                if conf < min_confidence:
                    continue
                rules.append(AssocRule(ante, cons, sa, sc, full, conf, conf / sc))
    rules.sort(key=lambda r: (-r.support, -r.confidence, len(r.antecedent) + len(r.consequent), r.antecedent, r.consequent))
    return rules


# -- IO ------------------------------------------------------------------------


def _num(x: Fraction) -> str:
    return repr(float(x))


def write_itemsets_csv(itemsets: Iterable[Itemset], path: str | os.PathLike) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ITEMSETS_HEADER)
        for n, s in enumerate(itemsets, 1):
            w.writerow([n, ITEM_SEP.join(s.items), _num(s.support)])
    return n


def read_itemsets_csv(path: str | os.PathLike) -> list[Itemset]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != ITEMSETS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(ITEMSETS_HEADER)}")
        return [Itemset(tuple(r[1].split(ITEM_SEP)), Fraction(r[2])) for r in reader if r]


def write_rules_csv(rules: Iterable[AssocRule], path: str | os.PathLike) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RULES_HEADER)
        for n, r in enumerate(rules, 1):
            w.writerow(
                [
                    n,
                    ITEM_SEP.join(r.antecedent),
                    ITEM_SEP.join(r.consequent),
                    _num(r.antecedent_support),
                    _num(r.consequent_support),
                    _num(r.support),
                    _num(r.confidence),
                    _num(r.lift),
                ]
            )
    return n


def write_txns_jsonl(rows: Iterable[tuple[str, Sequence[str], Sequence[Sequence[str]]]], path: str | os.PathLike) -> int:
    """Rows of (script_id, operator names, relation triples)."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for script_id, ops, rels in rows:
            rec = {"script_id": script_id, "operators": list(ops), "relations": [list(r) for r in rels]}
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
            n += 1
    return n


def _iter_txn_lines(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from exc
                if not isinstance(rec, dict):
                    raise ValueError(f"{path}:{lineno}: expected an object")
                yield lineno, rec


def read_txns_jsonl(path: str | os.PathLike, mode: TxnMode | str = TxnMode.SCRIPT) -> list[Transaction]:
    """Transactions from extractor output.

    A line with ``items`` is taken as a ready-made transaction; otherwise
    ``operators`` (script mode) or ``relations`` (relation-pair mode) is used.
    """
    mode = TxnMode(mode)
    ready: list[Transaction] = []
    per_script: list[tuple[str, list]] = []
    for lineno, rec in _iter_txn_lines(path):
        try:
            sid = str(rec.get("txn_id", rec.get("script_id")))
            if "items" in rec:
                items = frozenset(map(str, rec["items"]))
                if items:
                    ready.append(Transaction(sid, items))
            elif mode is TxnMode.SCRIPT:
                per_script.append((sid, [str(x) for x in rec["operators"]]))
            else:
                per_script.append((sid, [(str(r[0]), str(r[1])) for r in rec["relations"]]))
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed transaction record ({exc!r})") from exc
    built = build_transactions(per_script) if mode is TxnMode.SCRIPT else build_relation_transactions(per_script)
    return sorted(ready + built, key=lambda t: t.txn_id)
