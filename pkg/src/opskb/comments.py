"""Comment removal for ECMAScript sources.

A single-pass modal lexer (code, line comment, block comment, string,
template, regex) so that comment delimiters inside literals survive.
Whether a ``/`` starts a regex literal is decided from the previous
significant token.
"""

from __future__ import annotations

import logging
import re

log = logging.getLogger(__name__)

_IDENT_RUN = re.compile("[\\w$\u0080-\uffff]+")
_SPACE_RUN = re.compile("[ \\t\\f\\v\u00a0\ufeff]+")

# Keywords after which a slash begins a regex rather than a division.
_REGEX_KEYWORDS = frozenset(
    {
        "return", "typeof", "instanceof", "in", "of", "new", "delete", "void",
        "throw", "case", "do", "else", "yield", "await",
    }
)
_OP_CHARS = frozenset("+-*/%&|^<>=!?.:~")
_LINE_TERMINATORS = frozenset("\n\r\u2028\u2029")


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch in "_$" or ord(ch) > 0x7F


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.out: list[str] = []
        self.warnings: list[str] = []
        self.line = 0  # output line index
        self.touched: set[int] = set()
        self.literal_breaks: set[int] = set()  # lines whose terminating newline sits inside a literal
        # (kind, value) of the last significant token
        self.last: tuple[str, str] | None = None
        self.template_stack: list[int] = []

    # -- output helpers --------------------------------------------------

    def emit(self, chunk: str, in_literal: bool = False) -> None:
        if not chunk:
            return
        newlines = chunk.count("\n")
        if newlines:
            if in_literal:
                self.literal_breaks.update(range(self.line, self.line + newlines))
            self.line += newlines
        self.out.append(chunk)

    def _prev_char(self) -> str:
        for chunk in reversed(self.out):
            if chunk:
                return chunk[-1]
        return ""

    def _at_line_start(self) -> bool:
        for chunk in reversed(self.out):
            head, sep, tail = chunk.rpartition("\n")
            if tail.strip():
                return False
            if sep:
                return True
        return True

    # -- scanning --------------------------------------------------------

    def regex_allowed(self) -> bool:
        if self.last is None:
            return True
        kind, value = self.last
        if kind == "punct":
            return value not in (")", "]", "}", "++", "--")
        if kind == "ident":
            return value in _REGEX_KEYWORDS
        return False

    def run(self) -> str:
        text = self.text
        n = len(text)
        i = 0
        while i < n:
            ch = text[i]
            nxt = text[i + 1] if i + 1 < n else ""
            if ch == "/" and nxt == "/":
                j = i + 2
                while j < n and text[j] not in _LINE_TERMINATORS:
                    j += 1
                self.touched.add(self.line)
                i = j
            elif ch == "/" and nxt == "*":
                i = self._block_comment(i)
            elif ch == "/" and self.regex_allowed():
                i = self._regex(i)
            elif ch in "'\"":
                i = self._string(i, ch)
            elif ch == "`":
                i = self._template(i + 1, opening=True)
            elif ch == "}" and self.template_stack and self.template_stack[-1] == 0:
                self.template_stack.pop()
                i = self._template(i + 1, opening=False)
            elif ch.isdigit():
                m = _IDENT_RUN.match(text, i)
                j = m.end()
                while j < n and text[j] == "." and j + 1 < n and text[j + 1].isalnum():
                    j = _IDENT_RUN.match(text, j + 1).end()
                self.emit(text[i:j])
                self.last = ("num", text[i:j])
                i = j
            elif _is_ident_char(ch):
                j = _IDENT_RUN.match(text, i).end()
                self.emit(text[i:j])
                self.last = ("ident", text[i:j])
                i = j
            elif ch in " \t\f\v\u00a0\ufeff":
                j = _SPACE_RUN.match(text, i).end()
                self.emit(text[i:j])
                i = j
            elif ch in _LINE_TERMINATORS:
                self.emit(ch)
                i += 1
            else:
                if ch == "{" and self.template_stack:
                    self.template_stack[-1] += 1
                elif ch == "}" and self.template_stack:
                    self.template_stack[-1] -= 1
                value = ch
                if ch in "+-" and nxt == ch:
                    value = ch + ch
                self.emit(value)
                self.last = ("punct", value)
                i += len(value)
        return "".join(self.out)

    def _block_comment(self, i: int) -> int:
        text = self.text
        end = text.find("*/", i + 2)
        if end < 0:
            self.warnings.append(f"unterminated block comment at offset {i}")
            end = len(text)
        else:
            end += 2
        body = text[i:end]
        self.touched.add(self.line)
        if any(t in body for t in _LINE_TERMINATORS):
            # keeps automatic semicolon insertion behaviour intact
            if not self._at_line_start():
                self.emit("\n")
                self.touched.add(self.line)
        else:
            prev = self._prev_char()
            following = text[end] if end < len(text) else ""
            if prev and following and not prev.isspace() and not following.isspace():
                fuse_ident = _is_ident_char(prev) and _is_ident_char(following)
                fuse_op = prev in _OP_CHARS and following in _OP_CHARS
                if fuse_ident or fuse_op:
                    self.emit(" ")
        return end

    def _string(self, i: int, quote: str) -> int:
        text = self.text
        n = len(text)
        j = i + 1
        while j < n:
            c = text[j]
            if c == "\\":
                j += 2
                continue
            if c == quote:
                j += 1
                break
            if c in "\n\r":
                break  # unterminated; leave the newline to the code state
            j += 1
        j = min(j, n)
        self.emit(text[i:j], in_literal=True)
        self.last = ("str", quote)
        return j

    def _template(self, j: int, opening: bool) -> int:
        text = self.text
        n = len(text)
        start = j - 1
        while j < n:
            c = text[j]
            if c == "\\":
                j += 2
                continue
            if c == "`":
                j += 1
                self.emit(text[start:j], in_literal=True)
                self.last = ("template", "`")
                return j
            if c == "$" and j + 1 < n and text[j + 1] == "{":
                j += 2
                self.emit(text[start:j], in_literal=True)
                self.template_stack.append(0)
                self.last = ("punct", "{")
                return j
            j += 1
        self.emit(text[start:n], in_literal=True)
        self.warnings.append("unterminated template literal")
        return n

    def _regex(self, i: int) -> int:
        text = self.text
        n = len(text)
        j = i + 1
        in_class = False
        while j < n:
            c = text[j]
            if c in _LINE_TERMINATORS:
                # not a regex after all; treat the slash as an operator
                self.emit("/")
                self.last = ("punct", "/")
                return i + 1
            if c == "\\":
                j += 2
                continue
            if in_class:
                if c == "]":
                    in_class = False
            elif c == "[":
                in_class = True
            elif c == "/":
                break
            j += 1
        else:
            self.emit("/")
            self.last = ("punct", "/")
            return i + 1
        j += 1
        m = _IDENT_RUN.match(text, j)
        if m:
            j = m.end()
        self.emit(text[i:j], in_literal=True)
        self.last = ("regex", text[i:j])
        return j


def _finish(raw: str, touched: set[int], literal_breaks: set[int]) -> str:
    if not touched:
        return raw
    lines = raw.split("\n")
    blank: list[bool] = []
    for idx, line in enumerate(lines):
        starts_in_literal = idx - 1 in literal_breaks
        ends_in_literal = idx in literal_breaks
        if idx in touched and not ends_in_literal:
            if line.endswith("\r"):
                line = line[:-1].rstrip(" \t") + "\r"
            else:
                line = line.rstrip(" \t")
            lines[idx] = line
        blank.append(not starts_in_literal and not ends_in_literal and not line.strip())
    # a run of blank lines that a removal touched shrinks to one line
    # (to none at the top of the file); untouched runs stay as they were
    kept: list[str] = []
    i = 0
    while i < len(lines):
        if not blank[i]:
            kept.append(lines[i])
            i += 1
            continue
        j = i
        while j < len(lines) and blank[j]:
            j += 1
        if any(k in touched for k in range(i, j)):
            if kept:
                kept.append("")
        else:
            kept.extend(lines[i:j])
        i = j
    return "\n".join(kept)


def strip_comments_with_warnings(text: str) -> tuple[str, list[str]]:
    """Like :func:`strip_comments` but also returns lexer warnings."""
    lexer = _Lexer(text)
    raw = lexer.run()
    return _finish(raw, lexer.touched, lexer.literal_breaks), lexer.warnings


def strip_comments(text: str) -> str:
    """Remove ``//`` and ``/* */`` comments from *text*.

    Delimiters inside string, template and regex literals are kept.
    Trailing whitespace on lines that held a comment is dropped and blank
    lines created by the removal collapse to at most one. An unterminated
    block comment is removed to end of input with a logged warning.
    """
    out, warnings = strip_comments_with_warnings(text)
    for w in warnings:
        log.warning(w)
    return out
