"""Operator occurrences and pairwise operator relationships.

An *operator* is a call. Calls are grouped into statement units: a
statement unit is a direct child of a Program or block, the expression
body of an arrow function, or the non-block body of an if/for/while.
Within a unit, calls are numbered in evaluation order.

Four rules produce relation instances:

* same unit: consecutive calls are ``sequential``;
* def-use: when unit B reads a variable whose defining initializer in
  unit A contains calls, the last call of A precedes the first call of B
  (``sequential``);
* siblings: statements of one block are grouped into dependency
  components; the first calls of every two components are ``parallel``;
* nesting: header calls of if/for/while point to the first call of the
  body, and a call taking a function argument points to the first call
  of that function's body (``nested``).
"""

from __future__ import annotations

import csv
import enum
import io
import os
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .ast_front import NodeKind, SyntaxTree

__all__ = [
    "DYNAMIC",
    "NAMESPACES",
    "OperatorOccurrence",
    "OperatorRelation",
    "ParallelRule",
    "RelationInstance",
    "Relationship",
    "ScriptStructure",
    "aggregate",
    "canonical_key",
    "classify_relations",
    "extract_occurrences",
    "read_relations_csv",
    "write_relations_csv",
]

NAMESPACES = frozenset({"ee", "Map", "Export", "Chart", "ui"})
DYNAMIC = "<dynamic>"
RELATIONS_HEADER = ["index", "operator", "related_operator", "relationship", "frequency"]


class Relationship(str, enum.Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"
    NESTED = "nested"


_REL_ORDER = {Relationship.SEQUENTIAL: 0, Relationship.PARALLEL: 1, Relationship.NESTED: 2}


class ParallelRule(str, enum.Enum):
    DATAFLOW = "dataflow"
    INTERSECTION = "intersection"


class OperatorOccurrence(NamedTuple):
    canonical_name: str
    short_name: str
    stmt_id: int
    order_in_stmt: int
    depth: int
    span: tuple[int, int]
    call_id: int

    @property
    def named(self) -> bool:
        return self.canonical_name != DYNAMIC


class RelationInstance(NamedTuple):
    operator: str
    related_operator: str
    relationship: Relationship


@dataclass(frozen=True, slots=True)
class OperatorRelation:
    operator: str
    related_operator: str
    relationship: Relationship
    frequency: int


def canonical_key(a: str, b: str, rel: Relationship | str) -> RelationInstance:
    """Parallel pairs are unordered: store the smaller name first."""
    rel = Relationship(rel)
    if rel is Relationship.PARALLEL and b < a:
        a, b = b, a
    return RelationInstance(a, b, rel)


_FUNCTION_TAGS = frozenset(
    {"function_declaration", "generator_function_declaration", "method_definition"}
)
_REFERENCE_TAGS = frozenset({"identifier", "shorthand_property_identifier"})
_BINDING_TAGS = frozenset({"identifier", "shorthand_property_identifier_pattern"})
_ASSIGN_TAGS = frozenset({"assignment_expression", "augmented_assignment_expression"})
_FUNCTION_EXPR_TAGS = frozenset({"function_expression", "function", "arrow_function", "generator_function"})
# tags the def-use walk handles specially; everything else is a plain descent
_DATAFLOW_TAGS = (
    _FUNCTION_TAGS
    | _FUNCTION_EXPR_TAGS
    | _ASSIGN_TAGS
    | {"function_declaration", "generator_function_declaration", "variable_declarator", "for_in_statement"}
    | {"catch_clause", "class_declaration"}
)


_ANY_FUNCTION_TAGS = _FUNCTION_TAGS | _FUNCTION_EXPR_TAGS


_CONTAINER_KINDS = frozenset(
    {NodeKind.PROGRAM, NodeKind.IF_STATEMENT, NodeKind.FOR_STATEMENT, NodeKind.WHILE_STATEMENT, NodeKind.BLOCK_STATEMENT}
)


def _is_function(node) -> bool:
    return node.tag in _ANY_FUNCTION_TAGS


def _call_names(tree: SyntaxTree, call_id: int) -> tuple[str, str]:
    callee = tree[tree[call_id].children[0]]
    if callee.kind is NodeKind.IDENTIFIER and callee.tag == "identifier":
        return callee.name, callee.name
    if callee.kind is NodeKind.MEMBER_EXPRESSION and callee.name is not None:
        short = callee.name
        parts = [short]
        obj = tree[callee.children[0]]
        while obj.kind is NodeKind.MEMBER_EXPRESSION and obj.name is not None:
            parts.append(obj.name)
            obj = tree[obj.children[0]]
        if obj.kind is NodeKind.IDENTIFIER and obj.tag == "identifier" and obj.name in NAMESPACES:
            parts.append(obj.name)
            return ".".join(reversed(parts)), short
        return short, short
    return DYNAMIC, DYNAMIC


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass
class Container:
    """An ordered run of sibling statements."""

    owner: int
    stmts: list[int]
    role: str  # program | block | function | control
    ref: int | None = None  # function node or control node this body belongs to


class ScriptStructure:
    """Statement units, def-use edges and sibling grouping for one tree.

    Shared by relation classification and chain construction so both read
    the same structure.
    """

    def __init__(self, tree: SyntaxTree, parallel_rule: ParallelRule | str = ParallelRule.DATAFLOW):
        self.tree = tree
        self.parallel_rule = ParallelRule(parallel_rule)
        self.containers: list[Container] = []
        self.container_of: dict[int, int] = {}  # stmt -> container index
        self.control_bodies: dict[int, list[int]] = defaultdict(list)  # control node -> containers
        self.function_body: dict[int, int] = {}  # function node -> container
        self._find_containers()
        self.unit_of = self._assign_units()
        self.occurrences = self._occurrences()
        self.own_ops: dict[int, list[int]] = defaultdict(list)  # unit -> indices into occurrences
        for i, occ in enumerate(self.occurrences):
            if occ.named:
                self.own_ops[occ.stmt_id].append(i)

    # -- structure -------------------------------------------------------

    def _add_container(self, owner: int, stmts: Sequence[int], role: str, ref: int | None = None) -> int:
        idx = len(self.containers)
        self.containers.append(Container(owner, list(stmts), role, ref))
        for s in stmts:
            self.container_of[s] = idx
        return idx

    def _body_container(self, body: int, role: str, ref: int) -> int:
        node = self.tree[body]
        if node.kind is NodeKind.BLOCK_STATEMENT:
            return self._add_container(body, node.children, role, ref)
        return self._add_container(ref, [body], role, ref)

    def _find_containers(self) -> None:
        tree = self.tree
        claimed: set[int] = set()
        # ids are preorder, so id order is a preorder walk
        fn = _ANY_FUNCTION_TAGS
        for nid, node in enumerate(tree.nodes):
            kind = node.kind
            if kind not in _CONTAINER_KINDS and node.tag not in fn:
                continue
            if kind is NodeKind.PROGRAM:
                self._add_container(nid, node.children, "program")
            elif node.tag in fn and node.children:
                body = node.children[-1]
                self.function_body[nid] = self._body_container(body, "function", nid)
                claimed.add(body)
            elif kind is NodeKind.IF_STATEMENT and len(node.children) >= 2:
                bodies = [node.children[1]]
                for c in node.children[2:]:
                    if tree[c].tag == "else_clause" and tree[c].children:
                        bodies.append(tree[c].children[0])
                for body in bodies:
                    self.control_bodies[nid].append(self._body_container(body, "control", nid))
                    claimed.add(body)
            elif kind in (NodeKind.FOR_STATEMENT, NodeKind.WHILE_STATEMENT) and node.children:
                body = node.children[0] if node.tag == "do_statement" else node.children[-1]
                self.control_bodies[nid].append(self._body_container(body, "control", nid))
                claimed.add(body)
            elif kind is NodeKind.BLOCK_STATEMENT and nid not in claimed:
                self._add_container(nid, node.children, "block")

    def _assign_units(self) -> list[int | None]:
        parents = self.tree.parents
        units = self.container_of
        unit: list[int | None] = [None] * len(parents)
        for nid, p in enumerate(parents):
            unit[nid] = nid if nid in units else (None if p is None else unit[p])
        return unit

    def _occurrences(self) -> list[OperatorOccurrence]:
        tree = self.tree
        nodes = tree.nodes
        depths = tree.depths
        # postorder position: a subtree finishes at its last descendant, deeper nodes first
        last = list(range(len(nodes)))
        for nid in range(len(nodes) - 1, -1, -1):
            kids = nodes[nid].children
            if kids:
                last[nid] = last[kids[-1]]
        unit_of = self.unit_of
        call = NodeKind.CALL_EXPRESSION
        calls = [n.node_id for n in nodes if n.kind is call]
        calls.sort(key=lambda c: (-1 if unit_of[c] is None else unit_of[c], last[c], -c))
        occs = []
        counters: Counter = Counter()
        for c in calls:
            stmt = self.unit_of[c]
            canonical, short = _call_names(tree, c)
            order = counters[stmt]
            counters[stmt] += 1
            occs.append(OperatorOccurrence(canonical, short, stmt, order, depths[c], tree[c].span, c))
        return occs

    @cached_property
    def stmt_parent(self) -> dict[int, int | None]:
        """Statement unit enclosing each container's statements (None at top level)."""
        out = {}
        for cont in self.containers:
            outer = None if cont.role == "program" else self.unit_of[cont.owner]
            for s in cont.stmts:
                out[s] = outer
        return out

    def stmt_ancestors(self, stmt: int) -> list[int]:
        chain = []
        cur: int | None = stmt
        while cur is not None:
            chain.append(cur)
            cur = self.stmt_parent.get(cur)
        return chain

    @cached_property
    def subtree_first_op(self) -> dict[int, int]:
        """First named occurrence index inside each statement's subtree."""
        first: dict[int, int] = {}
        for i, occ in enumerate(self.occurrences):
            if not occ.named:
                continue
            for s in self.stmt_ancestors(occ.stmt_id):
                if s not in first or self._occ_key(i) < self._occ_key(first[s]):
                    first[s] = i
        return first

    def _occ_key(self, i: int) -> tuple[int, int]:
        occ = self.occurrences[i]
        return occ.stmt_id, occ.order_in_stmt

    @cached_property
    def subtree_names(self) -> dict[int, frozenset[str]]:
        names: dict[int, set[str]] = defaultdict(set)
        for occ in self.occurrences:
            if occ.named:
                for s in self.stmt_ancestors(occ.stmt_id):
                    names[s].add(occ.canonical_name)
        return {k: frozenset(v) for k, v in names.items()}

    def first_op_in(self, container: int) -> int | None:
        best = None
        for s in self.containers[container].stmts:
            i = self.subtree_first_op.get(s)
            if i is not None and (best is None or self._occ_key(i) < self._occ_key(best)):
                best = i
        return best

    # -- def-use -------------------------------------------------------

    @cached_property
    def _scope_flags(self) -> list[bool]:
        blocks = (NodeKind.PROGRAM, NodeKind.BLOCK_STATEMENT)
        fn = _ANY_FUNCTION_TAGS
        return [n.kind in blocks or n.tag in fn for n in self.tree.nodes]

    def _scope_parent(self) -> dict[int, int | None]:
        parents = self.tree.parents
        flags = self._scope_flags
        scope_parent: dict[int, int | None] = {}
        for nid, is_scope in enumerate(flags):
            if is_scope:
                p = parents[nid]
                while p is not None and not flags[p]:
                    p = parents[p]
                scope_parent[nid] = p
        return scope_parent

    def _is_scope(self, nid: int) -> bool:
        return self._scope_flags[nid]

    def _enclosing_scope(self, nid: int) -> int:
        parents = self.tree.parents
        p = parents[nid]
        while p is not None and not self._is_scope(p):
            p = parents[p]
        return self.tree.root if p is None else p

    @cached_property
    def dataflow(self) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        """(all def-use unit edges, edges whose definition carries calls).

        Lexical and per script: a use binds to the most recent definition
        of the name visible from the using statement.
        """
        tree = self.tree
        nodes = tree.nodes
        container_of = self.container_of
        special = _DATAFLOW_TAGS
        ident = NodeKind.IDENTIFIER
        scope_parent = self._scope_parent()
        bindings: dict[int, dict[str, tuple[int, bool] | None]] = defaultdict(dict)
        dep_edges: dict[tuple[int, int], None] = {}
        op_edges: dict[tuple[int, int], None] = {}

        def lookup(scope: int | None, name: str):
            while scope is not None:
                if name in bindings[scope]:
                    return bindings[scope][name]
                scope = scope_parent.get(scope)
            return None

        def function_scope(scope: int) -> int:
            while scope is not None and not (_is_function(tree[scope]) or tree[scope].kind is NodeKind.PROGRAM):
                scope = scope_parent.get(scope)
            return tree.root if scope is None else scope

        def bind(scope: int, name: str, value, mode: str) -> None:
            if mode == "var":
                bindings[function_scope(scope)][name] = value
            elif mode == "let":
                bindings[scope][name] = value
            else:
                s: int | None = scope
                while s is not None:
                    if name in bindings[s]:
                        bindings[s][name] = value
                        return
                    s = scope_parent.get(s)
                bindings[tree.root][name] = value

        own_call_spans = defaultdict(list)
        for occ in self.occurrences:
            if occ.named:
                own_call_spans[occ.stmt_id].append(occ.span)

        units = sorted(self.container_of)
        for unit in units:
            scope = self._enclosing_scope(unit)
            uses: list[str] = []
            defs: list[tuple[str, bool, str]] = []
            spans = own_call_spans.get(unit, [])

            def has_ops(nid: int) -> bool:
                s, e = tree[nid].span
                return any(s <= cs and ce <= e for cs, ce in spans)

            stack = [unit]
            while stack:
                nid = stack.pop()
                node = nodes[nid]
                if nid != unit and nid in container_of:
                    continue
                tag = node.tag
                if tag not in special:
                    if node.kind is ident:
                        if tag in _REFERENCE_TAGS:
                            uses.append(node.name)
                    else:
                        stack.extend(reversed(node.children))
                    continue
                if _is_function(node):
                    fscope = nid
                    if node.tag in ("function_declaration", "generator_function_declaration") and node.children:
                        first = tree[node.children[0]]
                        if first.kind is NodeKind.IDENTIFIER:
                            defs.append((first.name, False, "var"))
                    for c in node.children[:-1]:
                        for name in self._binding_names(c):
                            bindings[fscope][name] = None
                    continue
                if tag == "variable_declarator" and node.children:
                    mode = "var" if tree[self.tree.parents[nid]].tag == "variable_declaration" else "let"
                    value = node.children[1] if len(node.children) > 1 else None
                    carries = value is not None and has_ops(value)
                    for name in self._binding_names(node.children[0]):
                        defs.append((name, carries, mode))
                    stack.extend(reversed(node.children[1:]))
                    continue
                if tag in _ASSIGN_TAGS and len(node.children) >= 2:
                    target = tree[node.children[0]]
                    if target.kind is NodeKind.IDENTIFIER or target.tag in ("object_pattern", "array_pattern"):
                        carries = has_ops(node.children[-1])
                        for name in self._binding_names(node.children[0]):
                            defs.append((name, carries, "assign"))
                            if tag == "augmented_assignment_expression":
                                uses.append(name)
                        stack.extend(reversed(node.children[1:]))
                        continue
                if tag == "for_in_statement" and node.children:
                    left = tree[node.children[0]]
                    if left.kind is NodeKind.IDENTIFIER:
                        defs.append((left.name, False, "assign"))
                        stack.extend(reversed(node.children[1:]))
                        continue
                if tag == "catch_clause" and len(node.children) >= 2:
                    body = node.children[-1]
                    for c in node.children[:-1]:
                        for name in self._binding_names(c):
                            bindings[body][name] = None
                    stack.append(body)
                    continue
                if tag == "class_declaration" and node.children:
                    first = tree[node.children[0]]
                    if first.kind is NodeKind.IDENTIFIER:
                        defs.append((first.name, False, "let"))
                    stack.extend(reversed(node.children[1:]))
                    continue
                if node.kind is NodeKind.IDENTIFIER:
                    if tag in _REFERENCE_TAGS:
                        uses.append(node.name)
                    continue
                stack.extend(reversed(node.children))

            unit_has_ops = bool(spans)
            for name in uses:
                binding = lookup(scope, name)
                if binding is None:
                    continue
                src, carries = binding
                if src == unit:
                    continue
                dep_edges[(src, unit)] = None
                if carries and unit_has_ops:
                    op_edges[(src, unit)] = None
            for name, carries, mode in defs:
                bind(scope, name, (unit, carries), mode)
        return list(dep_edges), list(op_edges)

    def _binding_names(self, nid: int) -> list[str]:
        """Identifiers bound by a declaration target or parameter list."""
        tree = self.tree
        names = []
        stack = [nid]
        while stack:
            cur = tree[stack.pop()]
            if cur.kind is NodeKind.IDENTIFIER:
                if cur.tag in _BINDING_TAGS:
                    names.append(cur.name)
                continue
            if cur.tag == "assignment_pattern" and cur.children:
                stack.append(cur.children[0])  # default value is not a binding
                continue
            if cur.tag == "pair_pattern" and len(cur.children) >= 2:
                stack.append(cur.children[-1])
                continue
            stack.extend(reversed(cur.children))
        return names

    # -- sibling grouping ----------------------------------------------

    @cached_property
    def components(self) -> dict[int, list[list[int]]]:
        """Per container: groups of sibling statements that carry calls, in source order."""
        uf_by_container = {i: _UnionFind(len(c.stmts)) for i, c in enumerate(self.containers)}
        position = {s: c.stmts.index(s) for c in self.containers for s in c.stmts}
        if self.parallel_rule is ParallelRule.DATAFLOW:
            for a, b in self.dataflow[0]:
                self._join_at_divergence(a, b, uf_by_container, position)
        else:
            names = self.subtree_names
            for ci, cont in enumerate(self.containers):
                carriers = [s for s in cont.stmts if names.get(s)]
                for i, s in enumerate(carriers):
                    for t in carriers[i + 1 :]:
                        if names[s] & names[t]:
                            uf_by_container[ci].union(position[s], position[t])
        out: dict[int, list[list[int]]] = {}
        first = self.subtree_first_op
        for ci, cont in enumerate(self.containers):
            groups: dict[int, list[int]] = {}
            for pos, s in enumerate(cont.stmts):
                root = uf_by_container[ci].find(pos)
                groups.setdefault(root, []).append(s)
            comps = [[s for s in g if s in first] for g in groups.values()]
            comps = [g for g in comps if g]
            comps.sort(key=lambda g: position[g[0]])
            out[ci] = comps
        return out

    def _join_at_divergence(self, a: int, b: int, ufs, position) -> None:
        anc_a = {self.container_of[s]: s for s in self.stmt_ancestors(a)}
        for s in self.stmt_ancestors(b):
            ci = self.container_of[s]
            if ci in anc_a:
                other = anc_a[ci]
                if other != s:
                    ufs[ci].union(position[other], position[s])
                return

    # -- nesting -------------------------------------------------------

    def call_function_bodies(self) -> dict[int, list[int]]:
        """Named call occurrence index -> containers of function arguments."""
        tree = self.tree
        by_call = {occ.call_id: i for i, occ in enumerate(self.occurrences)}
        out: dict[int, list[int]] = defaultdict(list)
        for fn, cont in self.function_body.items():
            if tree[fn].kind is not NodeKind.FUNCTION_EXPRESSION:
                continue
            parent = tree.parents[fn]
            if parent is None or tree[parent].kind is not NodeKind.CALL_EXPRESSION:
                continue
            if tree[parent].children[0] == fn:
                continue
            i = by_call.get(parent)
            if i is not None and self.occurrences[i].named:
                out[i].append(cont)
        return out

    def control_header_ops(self, ctrl: int) -> list[int]:
        unit = self.unit_of[ctrl]
        s, e = self.tree[ctrl].span
        return [i for i in self.own_ops.get(unit, []) if s <= self.occurrences[i].span[0] and self.occurrences[i].span[1] <= e]


def extract_occurrences(tree: SyntaxTree) -> list[OperatorOccurrence]:
    """One occurrence per call, ordered by (statement, evaluation order).

    Calls whose callee is not a plain or dotted name are kept with the
    name ``<dynamic>``; relation rules skip them.
    """
    return list(ScriptStructure(tree).occurrences)


def classify_relations(
    tree: SyntaxTree,
    occs: Sequence[OperatorOccurrence] | None = None,
    parallel_rule: ParallelRule | str = ParallelRule.DATAFLOW,
    *,
    structure: ScriptStructure | None = None,
) -> list[RelationInstance]:
    st = structure or ScriptStructure(tree, parallel_rule)
    if occs is not None and list(occs) != st.occurrences:
        raise ValueError("occurrences were not extracted from this tree")
    occ = st.occurrences
    names = [o.canonical_name for o in occ]
    out: list[RelationInstance] = []
    parallel = Relationship.PARALLEL

    def emit(i: int, j: int, rel: Relationship) -> None:
        a, b = names[i], names[j]
        if rel is parallel and b < a:
            a, b = b, a
        out.append(RelationInstance(a, b, rel))

    # same statement
    for unit in sorted(st.own_ops):
        ops = st.own_ops[unit]
        for a, b in zip(ops, ops[1:]):
            emit(a, b, Relationship.SEQUENTIAL)
    # def-use across statements
    for a_unit, b_unit in st.dataflow[1]:
        emit(st.own_ops[a_unit][-1], st.own_ops[b_unit][0], Relationship.SEQUENTIAL)
    # independent siblings
    first = st.subtree_first_op
    if st.parallel_rule is ParallelRule.DATAFLOW:
        for ci in range(len(st.containers)):
            comps = st.components[ci]
            heads = [first[g[0]] for g in comps]
            for x in range(len(heads)):
                for y in range(x + 1, len(heads)):
                    emit(heads[x], heads[y], Relationship.PARALLEL)
    else:
        op_sets = st.subtree_names
        for cont in st.containers:
            carriers = [s for s in cont.stmts if s in first]
            for x, s in enumerate(carriers):
                for t in carriers[x + 1 :]:
                    if not (op_sets[s] & op_sets[t]):
                        emit(first[s], first[t], Relationship.PARALLEL)
    # control scopes and function arguments
    for ctrl in sorted(st.control_bodies):
        header = st.control_header_ops(ctrl)
        if not header:
            continue
        for ci in st.control_bodies[ctrl]:
            target = st.first_op_in(ci)
            if target is not None:
                for h in header:
                    emit(h, target, Relationship.NESTED)
    bodies = st.call_function_bodies()
    for i in sorted(bodies, key=st._occ_key):
        for ci in bodies[i]:
            target = st.first_op_in(ci)
            if target is not None:
                emit(i, target, Relationship.NESTED)
    return out


def aggregate(relation_streams: Iterable[Iterable[RelationInstance | tuple]]) -> list[OperatorRelation]:
    """Sum relation instances from many scripts into frequency rows."""
    counts: Counter = Counter()
    for stream in relation_streams:
        for a, b, rel in stream:
            counts[canonical_key(a, b, rel)] += 1
    rows = [OperatorRelation(k.operator, k.related_operator, k.relationship, n) for k, n in counts.items()]
    rows.sort(key=lambda r: (_REL_ORDER[r.relationship], -r.frequency, r.operator, r.related_operator))
    return rows


def write_relations_csv(rows: Iterable[OperatorRelation], path_or_file) -> None:
    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RELATIONS_HEADER)
        for i, r in enumerate(rows, 1):
            w.writerow([i, r.operator, r.related_operator, r.relationship.value, r.frequency])

    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_file)


def read_relations_csv(path: str | os.PathLike) -> list[OperatorRelation]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RELATIONS_HEADER:
            raise ValueError(f"{path}: expected header {','.join(RELATIONS_HEADER)}")
        return [OperatorRelation(r[1], r[2], Relationship(r[3]), int(r[4])) for r in reader if r]


def relations_to_csv_text(rows: Iterable[OperatorRelation]) -> str:
    buf = io.StringIO()
    write_relations_csv(rows, buf)
    return buf.getvalue()
