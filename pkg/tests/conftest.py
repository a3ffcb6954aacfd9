from __future__ import annotations

import sys
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
MINI_CORPUS = FIXTURES / "mini_corpus"
SYNTAX_CSV = FIXTURES / "syntax.csv"
COMMENT_FIXTURES = FIXTURES / "comments"


@pytest.fixture
def mini_corpus() -> Path:
    return MINI_CORPUS


@pytest.fixture
def syntax_csv() -> Path:
    return SYNTAX_CSV


def snippet_text(name: str) -> str:
    return (MINI_CORPUS / f"{name}.js").read_text(encoding="utf-8")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
