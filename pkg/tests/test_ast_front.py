from __future__ import annotations

import pytest
from hypothesis import given, settings

from conftest import snippet_text
from jsgen import programs
from opskb.ast_front import NodeKind, ParseFailure, from_json, parse, parse_source, to_json, validate
from opskb.corpus import ScriptRecord, Stage


def _tree(text: str):
    tree = parse_source(text, "t")
    assert not isinstance(tree, ParseFailure), tree
    return tree


def test_minimal_program():
    tree = _tree("var a = 1;")
    tree.check()
    root = tree[tree.root]
    assert root.kind is NodeKind.PROGRAM
    assert tree[root.children[0]].kind is NodeKind.VARIABLE_DECLARATION


def test_syntax_error_position():
    res = parse_source("var a = ;", "bad")
    assert isinstance(res, ParseFailure)
    assert (res.line, res.column) == (1, 9)
    assert res.reject_reason == "syntax at 1:9"


def test_snippet_sequential_structure():
    tree = _tree(snippet_text("sequential"))
    top = tree[tree.root].children
    assert len(top) == 3
    calls = [n for n in tree.nodes if n.kind is NodeKind.CALL_EXPRESSION]
    callee_text = []
    for c in calls:
        callee = tree[c.children[0]]
        callee_text.append(callee.name)
    assert callee_text == ["Image", "normalizedDifference", "addLayer"]


def test_arrow_function_is_function_expression():
    tree = _tree("var f = (x) => x + 1;")
    assert any(n.kind is NodeKind.FUNCTION_EXPRESSION for n in tree.nodes)


def test_module_syntax_maps_to_other():
    tree = _tree("import x from 'y';\nexport const z = 1;")
    kinds = [tree[c].kind for c in tree[tree.root].children]
    assert kinds[0] is NodeKind.OTHER


def test_jsx_rejected():
    assert isinstance(parse_source("var a = <div>hi</div>;"), ParseFailure)


def test_timeout_is_a_rejection():
    text = "var a = [" + ", ".join(["f(1)"] * 20000) + "];"
    res = parse_source(text, "slow", timeout=1e-9)
    assert isinstance(res, ParseFailure) and res.reject_reason == "timeout"


def test_validate_moves_record():
    rec = ScriptRecord.from_text("a.js", "a.js", "f(;").advance(Stage.CLEANED)
    out, res = validate(rec)
    assert out.stage is Stage.REJECTED and out.reject_reason.startswith("syntax at 1:")
    ok, tree = validate(ScriptRecord.from_text("b.js", "b.js", "f();").advance(Stage.CLEANED))
    assert ok.stage is Stage.VALIDATED and tree.script_id == "b.js"


def test_parse_requires_cleaned_record():
    with pytest.raises(ValueError):
        parse(ScriptRecord.from_text("a.js", "a.js", "f();"))


def test_json_round_trip_and_stability():
    text = snippet_text("nested")
    tree = _tree(text)
    dumped = to_json(tree)
    assert from_json(dumped) == tree
    assert to_json(_tree(text)) == dumped


def test_from_json_rejects_broken_tree():
    import json

    data = json.loads(to_json(_tree("f(a);")))
    data["nodes"][2]["children"].append(0)
    with pytest.raises(ValueError):
        from_json(json.dumps(data))


@settings(max_examples=50, deadline=None)
@given(programs)
def test_generated_programs_round_trip(text):
    tree = _tree(text)
    tree.check()
    assert from_json(to_json(tree)) == tree
    assert _tree(text) == tree
    for n in tree.nodes:
        if n.kind is NodeKind.CALL_EXPRESSION:
            assert n.children
