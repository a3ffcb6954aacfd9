"""Per-script operator relationship chains.

A chain is a small tree: ``Leaf`` (one operator), ``Seq`` (ordered),
``Par`` (order-free branches) and ``Nest`` (an operator governing a
body). Text form::

    chain := seq
    seq   := node (" -> " node)*
    node  := OPNAME | par | nest
    par   := "{ " seq (" " seq)+ " }"
    nest  := OPNAME " ~> { " seq " }"

Inside braces a new branch starts at any node not preceded by ``->``.
Constructors :func:`seq` and :func:`par` keep chains canonical: nested
sequences and groups are flattened, single-element groups collapse, and
parallel branches are sorted by their text.
"""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass
from typing import Iterable, Union

from .ast_front import SyntaxTree
from .relations import ParallelRule, ScriptStructure

__all__ = [
    "Chain",
    "ChainParseError",
    "ChainRecord",
    "EmptyChainError",
    "Leaf",
    "Nest",
    "Par",
    "Seq",
    "build_chain",
    "chain_tokens",
    "leaves",
    "par",
    "parse_chain",
    "read_chains_csv",
    "seq",
    "serialize",
    "write_chains_csv",
]

CHAINS_HEADER = ["script_name", "chain"]


@dataclass(frozen=True, slots=True)
class Leaf:
    name: str


@dataclass(frozen=True, slots=True)
class Seq:
    children: tuple["Chain", ...]


@dataclass(frozen=True, slots=True)
class Par:
    branches: tuple["Chain", ...]


@dataclass(frozen=True, slots=True)
class Nest:
    head: Leaf
    body: "Chain"


Chain = Union[Leaf, Seq, Par, Nest]


@dataclass(frozen=True)
class ChainRecord:
    script_name: str
    chain: Chain


class EmptyChainError(ValueError):
    """The script has no named operators, so there is nothing to chain."""


class ChainParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


def seq(*nodes: Chain | None) -> Chain | None:
    flat: list[Chain] = []
    for n in nodes:
        if n is None:
            continue
        if isinstance(n, Seq):
            flat.extend(n.children)
        else:
            flat.append(n)
    if not flat:
        return None
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


def par(*nodes: Chain | None) -> Chain | None:
    flat: list[Chain] = []
    for n in nodes:
        if n is None:
            continue
        if isinstance(n, Par):
            flat.extend(n.branches)
        else:
            flat.append(n)
    if not flat:
        return None
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(sorted(flat, key=serialize)))


def serialize(chain: Chain, paper_style: bool = False) -> str:
    """Render *chain*; ``paper_style`` writes ``->`` for nesting too (lossy)."""
    if isinstance(chain, Leaf):
        return chain.name
    if isinstance(chain, Seq):
        return " -> ".join(serialize(c, paper_style) for c in chain.children)
    if isinstance(chain, Par):
        return "{ " + " ".join(serialize(b, paper_style) for b in chain.branches) + " }"
    if isinstance(chain, Nest):
        arrow = " -> " if paper_style else " ~> "
        return chain.head.name + arrow + "{ " + serialize(chain.body, paper_style) + " }"
    raise TypeError(f"not a chain node: {chain!r}")


_TOKEN = re.compile(r"\s*(->|~>|\{|\}|[^\s{}]+)")
_IDENT = "[A-Za-z_$\u0080-\uffff][\\w$\u0080-\uffff]*"
_OPNAME = re.compile(f"{_IDENT}(?:\\.{_IDENT})*")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    encoded_upto = 0
    byte_pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(1)
        byte_pos += len(text[encoded_upto:start].encode("utf-8"))
        encoded_upto = start
        tokens.append((m.group(1), byte_pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.end = len(text.encode("utf-8"))

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def offset(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else self.end

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ChainParseError(f"unexpected end of chain, expected {expected or 'a node'}", self.end)
        if expected is not None and tok != expected:
            raise ChainParseError(f"expected {expected!r}, found {tok!r}", self.offset())
        self.i += 1
        return tok

    def parse_seq(self) -> Chain:
        nodes = [self.parse_node()]
        while self.peek() == "->":
            self.take("->")
            nodes.append(self.parse_node())
        return seq(*nodes)

    def parse_node(self) -> Chain:
        tok = self.peek()
        if tok == "{":
            at = self.offset()
            self.take("{")
            branches = [self.parse_seq()]
            while self.peek() not in ("}", None):
                branches.append(self.parse_seq())
            self.take("}")
            if len(branches) < 2:
                raise ChainParseError("a parallel group needs at least two branches", at)
            return par(*branches)
        if tok in ("->", "~>", "}") or tok is None:
            raise ChainParseError(f"expected an operator or group, found {tok!r}", self.offset())
        if not _OPNAME.fullmatch(tok):
            raise ChainParseError(f"invalid operator name {tok!r}", self.offset())
        self.take()
        if self.peek() == "~>":
            self.take("~>")
            self.take("{")
            body = self.parse_seq()
            self.take("}")
            return Nest(Leaf(tok), body)
        return Leaf(tok)


def parse_chain(text: str) -> Chain:
    p = _Parser(text)
    if p.peek() is None:
        raise ChainParseError("empty chain", 0)
    chain = p.parse_seq()
    if p.peek() is not None:
        raise ChainParseError(f"trailing token {p.peek()!r}", p.offset())
    return chain


def chain_tokens(text: str) -> list[str]:
    """Operator names of a serialized chain in textual order."""
    return [tok for tok, _ in _tokenize(text) if tok not in ("->", "~>", "{", "}")]


def leaves(chain: Chain) -> list[str]:
    if isinstance(chain, Leaf):
        return [chain.name]
    if isinstance(chain, Seq):
        return [n for c in chain.children for n in leaves(c)]
    if isinstance(chain, Par):
        return [n for b in chain.branches for n in leaves(b)]
    return [chain.head.name, *leaves(chain.body)]


# -- construction from a syntax tree -------------------------------------


def build_chain(
    tree: SyntaxTree,
    occs=None,
    parallel_rule: ParallelRule | str = ParallelRule.DATAFLOW,
    *,
    structure: ScriptStructure | None = None,
) -> Chain:
    """Chain for one script; every named call appears exactly once as a leaf."""
    st = structure or ScriptStructure(tree, parallel_rule)
    if occs is not None and list(occs) != st.occurrences:
        raise ValueError("occurrences were not extracted from this tree")
    builder = _ChainBuilder(st)
    chain = builder.container(0)
    if chain is None:
        raise EmptyChainError(f"{tree.script_id}: empty chain")
    return chain


class _ChainBuilder:
    def __init__(self, st: ScriptStructure):
        self.st = st
        self.fn_bodies = st.call_function_bodies()
        attached: dict[int, list[int]] = {}
        for ci, cont in enumerate(st.containers):
            if cont.role == "program":
                continue
            attached.setdefault(st.unit_of[cont.owner], []).append(ci)
        self.attached = attached

    def container(self, ci: int) -> Chain | None:
        branches = [seq(*(self.statement(s) for s in comp)) for comp in self.st.components[ci]]
        return par(*branches)

    def statement(self, stmt: int) -> Chain | None:
        st = self.st
        ops = st.own_ops.get(stmt, [])
        fn_parts = {i: self.fn_bodies.get(i, []) for i in ops}
        ctrl_parts: dict[int, list[list[int]]] = {i: [] for i in ops}
        used = {c for cs in fn_parts.values() for c in cs}
        free: list[int] = []
        for ctrl in sorted(st.control_bodies):
            if st.unit_of[ctrl] != stmt:
                continue
            header = st.control_header_ops(ctrl)
            bodies = st.control_bodies[ctrl]
            used.update(bodies)
            if header:
                ctrl_parts[header[-1]].append(bodies)
            else:
                free.extend(bodies)
        free.extend(c for c in self.attached.get(stmt, []) if c not in used)
        free.sort(key=self._container_start)
        items: list[Chain | None] = []
        for i in ops:
            leaf = Leaf(st.occurrences[i].canonical_name)
            body = seq(
                *(self.container(c) for c in fn_parts[i]),
                *(par(*(self.container(c) for c in bodies)) for bodies in ctrl_parts[i]),
            )
            items.append(leaf if body is None else Nest(leaf, body))
        items.extend(self.container(c) for c in free)
        return seq(*items)

    def _container_start(self, ci: int) -> int:
        cont = self.st.containers[ci]
        tree = self.st.tree
        return tree[cont.stmts[0]].span[0] if cont.stmts else tree[cont.owner].span[0]


# -- CSV -------------------------------------------------------------------


def write_chains_csv(records: Iterable[ChainRecord], path: str | os.PathLike, paper_style: bool = False) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(CHAINS_HEADER)
        for rec in records:
            w.writerow([rec.script_name, serialize(rec.chain, paper_style)])
            n += 1
    return n


def read_chains_csv(path: str | os.PathLike) -> dict[str, str]:
    """script_name -> raw chain text (not parsed; paper-style text is lossy)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CHAINS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CHAINS_HEADER)}")
        out = {}
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"{path}: malformed row {row!r}")
            out[row[0]] = row[1]
        return out
