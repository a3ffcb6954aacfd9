"""ECMAScript parsing into a small, normalized syntax tree.

The concrete grammar comes from tree-sitter's JavaScript grammar; its
node types are folded into thirteen kinds. Anything outside that set
becomes ``Other`` with its children kept. Every node also records the
grammar type it came from (``tag``), which downstream def-use analysis
relies on to tell bindings from references.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from functools import cached_property
from itertools import repeat
from typing import NamedTuple

import tree_sitter_javascript
from tree_sitter import Language, Parser

from .corpus import ScriptRecord, Stage

__all__ = [
    "AstNode",
    "NodeKind",
    "ParseFailure",
    "SyntaxTree",
    "from_json",
    "parse",
    "parse_source",
    "to_json",
    "validate",
]

DEFAULT_TIMEOUT = 10.0


class NodeKind(str, enum.Enum):
    PROGRAM = "Program"
    VARIABLE_DECLARATION = "VariableDeclaration"
    EXPRESSION_STATEMENT = "ExpressionStatement"
    CALL_EXPRESSION = "CallExpression"
    MEMBER_EXPRESSION = "MemberExpression"
    IDENTIFIER = "Identifier"
    FUNCTION_EXPRESSION = "FunctionExpression"
    IF_STATEMENT = "IfStatement"
    FOR_STATEMENT = "ForStatement"
    WHILE_STATEMENT = "WhileStatement"
    RETURN_STATEMENT = "ReturnStatement"
    BLOCK_STATEMENT = "BlockStatement"
    OTHER = "Other"


_KIND_BY_TYPE = {
    "program": NodeKind.PROGRAM,
    "variable_declaration": NodeKind.VARIABLE_DECLARATION,
    "lexical_declaration": NodeKind.VARIABLE_DECLARATION,
    "expression_statement": NodeKind.EXPRESSION_STATEMENT,
    "call_expression": NodeKind.CALL_EXPRESSION,
    "new_expression": NodeKind.CALL_EXPRESSION,
    "member_expression": NodeKind.MEMBER_EXPRESSION,
    "subscript_expression": NodeKind.MEMBER_EXPRESSION,
    "identifier": NodeKind.IDENTIFIER,
    "property_identifier": NodeKind.IDENTIFIER,
    "private_property_identifier": NodeKind.IDENTIFIER,
    "shorthand_property_identifier": NodeKind.IDENTIFIER,
    "shorthand_property_identifier_pattern": NodeKind.IDENTIFIER,
    "function_expression": NodeKind.FUNCTION_EXPRESSION,
    "function": NodeKind.FUNCTION_EXPRESSION,
    "arrow_function": NodeKind.FUNCTION_EXPRESSION,
    "generator_function": NodeKind.FUNCTION_EXPRESSION,
    "if_statement": NodeKind.IF_STATEMENT,
    "for_statement": NodeKind.FOR_STATEMENT,
    "for_in_statement": NodeKind.FOR_STATEMENT,
    "while_statement": NodeKind.WHILE_STATEMENT,
    "do_statement": NodeKind.WHILE_STATEMENT,
    "return_statement": NodeKind.RETURN_STATEMENT,
    "statement_block": NodeKind.BLOCK_STATEMENT,
}

# Lexical detail below these is dropped; it never holds calls.
_OPAQUE = frozenset({"string", "regex", "number"})
_SKIP = frozenset({"comment", "html_comment", "hash_bang_line", "string_fragment", "escape_sequence"})
_JSX_PREFIX = "jsx_"


class AstNode(NamedTuple):
    node_id: int
    kind: NodeKind
    children: tuple[int, ...]
    span: tuple[int, int]
    name: str | None = None
    tag: str | None = None


@dataclass(frozen=True)
class SyntaxTree:
    script_id: str
    root: int
    nodes: tuple[AstNode, ...] = field(repr=False)

    def __getitem__(self, node_id: int) -> AstNode:
        return self.nodes[node_id]

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def parents(self) -> tuple[int | None, ...]:
        parent: list[int | None] = [None] * len(self.nodes)
        for node in self.nodes:
            for c in node.children:
                parent[c] = node.node_id
        return tuple(parent)

    @cached_property
    def depths(self) -> tuple[int, ...]:
        depth = [0] * len(self.nodes)
        # ids are assigned in preorder, so a parent is always seen first
        for node in self.nodes:
            for c in node.children:
                depth[c] = depth[node.node_id] + 1
        return tuple(depth)

    def walk(self, start: int | None = None):
        """Yield node ids in preorder (source order)."""
        stack = [self.root if start is None else start]
        while stack:
            nid = stack.pop()
            yield nid
            stack.extend(reversed(self.nodes[nid].children))

    def check(self) -> None:
        """Raise ``ValueError`` unless the structural invariants hold."""
        n = len(self.nodes)
        if not (0 <= self.root < n) or self.nodes[self.root].kind is not NodeKind.PROGRAM:
            raise ValueError("root must be a Program node")
        seen_parent: dict[int, int] = {}
        for node in self.nodes:
            if self.nodes[node.node_id] is not node:
                raise ValueError(f"node {node.node_id} stored at wrong index")
            start, end = node.span
            if start > end:
                raise ValueError(f"node {node.node_id} has inverted span")
            prev_end = start
            for c in node.children:
                if not (0 <= c < n):
                    raise ValueError(f"node {node.node_id} references missing child {c}")
                if c in seen_parent:
                    raise ValueError(f"node {c} has two parents")
                seen_parent[c] = node.node_id
                cs, ce = self.nodes[c].span
                if cs < prev_end or ce > end:
                    raise ValueError(f"child {c} span escapes or overlaps inside node {node.node_id}")
                prev_end = ce
            if node.kind is NodeKind.CALL_EXPRESSION and not node.children:
                raise ValueError(f"call {node.node_id} has no callee")
        if self.root in seen_parent:
            raise ValueError("root has a parent")
        if len(seen_parent) != n - 1:
            raise ValueError("nodes are not all reachable from the root")
        reached = sum(1 for _ in self.walk())
        if reached != n:
            raise ValueError("tree contains a cycle or unreachable nodes")


@dataclass(frozen=True)
class ParseFailure:
    """A script that did not parse. Line and column are 1-based."""

    script_id: str
    line: int
    column: int
    message: str
    reason: str = "syntax"

    @property
    def reject_reason(self) -> str:
        if self.reason == "syntax":
            return f"syntax at {self.line}:{self.column}"
        return self.reason


class _Timeout(Exception):
    pass


_LANGUAGE = Language(tree_sitter_javascript.language())
_CHUNK = 1 << 16
_TYPE_NAMES = tuple(_LANGUAGE.node_kind_for_id(i) or "" for i in range(_LANGUAGE.node_kind_count))
_KIND_BY_ID = tuple(_KIND_BY_TYPE.get(t, NodeKind.OTHER) for t in _TYPE_NAMES)

_ACT_DESCEND, _ACT_SKIP, _ACT_ARGUMENTS, _ACT_JSX, _ACT_OPAQUE, _ACT_MEMBER = range(6)


def _action(ntype: str) -> int:
    if ntype in _SKIP:
        return _ACT_SKIP
    if ntype == "arguments":
        return _ACT_ARGUMENTS
    if ntype.startswith(_JSX_PREFIX):
        return _ACT_JSX
    if ntype in _OPAQUE:
        return _ACT_OPAQUE
    if ntype == "member_expression":
        return _ACT_MEMBER
    return _ACT_DESCEND


_ACTION_BY_ID = tuple(_action(t) for t in _TYPE_NAMES)


def _parser() -> Parser:
    # Parser objects are cheap but not thread-safe; one per call.
    return Parser(_LANGUAGE)


def _position(source: bytes, offset: int) -> tuple[int, int]:
    line_start = source.rfind(b"\n", 0, offset) + 1
    line = source.count(b"\n", 0, offset) + 1
    column = len(source[line_start:offset].decode("utf-8", errors="replace")) + 1
    return line, column


def _first_error(root):
    node = root
    while True:
        for child in node.children:
            if child.is_error or child.is_missing:
                return child
            if child.has_error:
                node = child
                break
        else:
            return node if node.is_error else None


def _error_offset(source: bytes, err) -> int:
    if err.is_missing:
        return err.start_byte
    # Tokens the parser skipped sit inside ERROR; point at what follows them.
    pos = err.end_byte
    while pos < len(source) and source[pos : pos + 1] in (b" ", b"\t", b"\n", b"\r"):
        pos += 1
    return pos if pos < len(source) else err.start_byte


def parse_source(text: str, script_id: str = "<string>", timeout: float = DEFAULT_TIMEOUT) -> SyntaxTree | ParseFailure:
    """Parse *text*; a syntax error or timeout comes back as a ParseFailure value."""
    source = text.encode("utf-8")
    deadline = time.monotonic() + timeout
    expired = False

    def read(offset, _point):
        nonlocal expired
        if time.monotonic() > deadline:
            expired = True
            return b""
        return source[offset : offset + _CHUNK]

    tree = _parser().parse(read)
    if expired or tree is None:
        return ParseFailure(script_id, 0, 0, f"parse exceeded {timeout}s", reason="timeout")
    root = tree.root_node
    if root.has_error:
        err = _first_error(root)
        offset = _error_offset(source, err) if err is not None else 0
        line, column = _position(source, offset)
        what = f'missing "{err.type}"' if err is not None and err.is_missing else "unexpected token"
        return ParseFailure(script_id, line, column, what)
    try:
        return _normalize(root, source, script_id, deadline)
    except _Timeout:
        return ParseFailure(script_id, 0, 0, f"parse exceeded {timeout}s", reason="timeout")
    except _Unsupported as exc:
        line, column = _position(source, exc.offset)
        return ParseFailure(script_id, line, column, str(exc))


class _Unsupported(Exception):
    def __init__(self, message: str, offset: int):
        super().__init__(message)
        self.offset = offset


def _normalize(root, source: bytes, script_id: str, deadline: float) -> SyntaxTree:
    # hot loop: per-kind_id tables, two parallel stacks, tuples built once at the end
    type_names = _TYPE_NAMES
    kind_of = _KIND_BY_ID
    action_of = _ACTION_BY_ID
    call = NodeKind.CALL_EXPRESSION
    ident = NodeKind.IDENTIFIER
    kinds: list[NodeKind] = []
    children: list[list[int]] = []
    spans: list[tuple[int, int]] = []
    names: list[str | None] = []
    tags: list[str] = []
    node_stack = [root]
    parent_stack = [-1]
    pop_node, pop_parent = node_stack.pop, parent_stack.pop
    push_nodes, push_parents = node_stack.extend, parent_stack.extend
    while node_stack:
        node = pop_node()
        parent = pop_parent()
        kind_id = node.kind_id
        action = action_of[kind_id]
        if action == _ACT_SKIP:
            continue
        if action == _ACT_ARGUMENTS and parent >= 0 and kinds[parent] is call:
            # call arguments hang directly off the call, after the callee
            kids = node.named_children
            kids.reverse()
            push_nodes(kids)
            push_parents([parent] * len(kids))
            continue
        if action == _ACT_JSX:
            raise _Unsupported("JSX is not ECMAScript", node.start_byte)
        nid = len(kinds)
        if nid & 4095 == 0 and time.monotonic() > deadline:
            raise _Timeout()
        kind = kind_of[kind_id]
        start = node.start_byte
        end = node.end_byte
        name = None
        if kind is ident:
            name = source[start:end].decode("utf-8")
        elif action == _ACT_MEMBER:
            prop = node.child_by_field_name("property")
            if prop is not None:
                name = source[prop.start_byte : prop.end_byte].decode("utf-8")
        kinds.append(kind)
        children.append([])
        spans.append((start, end))
        names.append(name)
        tags.append(type_names[kind_id])
        if parent >= 0:
            children[parent].append(nid)
        if action == _ACT_OPAQUE:
            continue
        kids = node.named_children
        if kids:
            kids.reverse()
            push_nodes(kids)
            push_parents([nid] * len(kids))
    fields = zip(range(len(kinds)), kinds, map(tuple, children), spans, names, tags)
    nodes = tuple(map(tuple.__new__, repeat(AstNode), fields))
    return SyntaxTree(script_id, 0, nodes)


def parse(record: ScriptRecord, timeout: float = DEFAULT_TIMEOUT) -> SyntaxTree | ParseFailure:
    if record.stage is not Stage.CLEANED:
        raise ValueError(f"{record.script_id}: parse expects a cleaned record, got {record.stage.value}")
    return parse_source(record.text, record.script_id, timeout)


def validate(record: ScriptRecord, timeout: float = DEFAULT_TIMEOUT) -> tuple[ScriptRecord, SyntaxTree | ParseFailure]:
    """Parse a cleaned record and move it to validated or rejected."""
    result = parse(record, timeout)
    if isinstance(result, ParseFailure):
        return record.advance(Stage.REJECTED, reason=result.reject_reason), result
    return record.advance(Stage.VALIDATED), result


def to_json(tree: SyntaxTree) -> str:
    payload = {
        "script_id": tree.script_id,
        "root": tree.root,
        "nodes": [
            {
                "id": n.node_id,
                "kind": n.kind.value,
                "children": list(n.children),
                "span": list(n.span),
                "name": n.name,
                "tag": n.tag,
            }
            for n in tree.nodes
        ],
    }
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def from_json(text: str) -> SyntaxTree:
    data = json.loads(text)
    try:
        raw = sorted(data["nodes"], key=lambda d: d["id"])
        nodes = tuple(
            AstNode(
                int(d["id"]),
                NodeKind(d["kind"]),
                tuple(int(c) for c in d["children"]),
                (int(d["span"][0]), int(d["span"][1])),
                d.get("name"),
                d.get("tag"),
            )
            for d in raw
        )
        tree = SyntaxTree(str(data["script_id"]), int(data["root"]), nodes)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ValueError(f"malformed AST JSON: {exc}") from exc
    tree.check()
    return tree
