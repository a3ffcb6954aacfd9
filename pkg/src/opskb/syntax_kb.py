"""Operator syntax table: loading, validation and name checks."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .relations import DYNAMIC

__all__ = [
    "SYNTAX_HEADER",
    "Parameter",
    "SchemaError",
    "SyntaxEntry",
    "check_known",
    "load_syntax",
    "write_syntax_csv",
]

SYNTAX_HEADER = ["index", "full_name", "short_name", "description", "output_type", "parameters"]


class SchemaError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class Parameter:
    name: str
    type: str = ""
    default: str | None = None
    details: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "type": self.type, "details": self.details}
        if self.default is not None:
            d["default"] = self.default
        return d


@dataclass(frozen=True)
class SyntaxEntry:
    full_name: str
    short_name: str
    description: str = ""
    output_type: str = ""
    parameters: tuple[Parameter, ...] = field(default_factory=tuple)

    @property
    def tail(self) -> str:
        return self.short_name.rsplit(".", 1)[-1]

    def to_dict(self) -> dict:
        return {
            "full_name": self.full_name,
            "short_name": self.short_name,
            "description": self.description,
            "output_type": self.output_type,
            "parameters": [p.to_dict() for p in self.parameters],
        }


def _parameters(raw, row: int) -> tuple[Parameter, ...]:
    if isinstance(raw, str):
        raw = raw.strip()
        if not raw:
            return ()
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"parameters is not a JSON array ({exc.msg})", row) from None
    if not isinstance(raw, list):
        raise SchemaError("parameters must be a list", row)
    params = []
    seen = set()
    for p in raw:
        if not isinstance(p, dict) or not isinstance(p.get("name"), str) or not p["name"]:
            raise SchemaError("each parameter needs a non-empty name", row)
        if p["name"] in seen:
            raise SchemaError(f"duplicate parameter {p['name']!r}", row)
        seen.add(p["name"])
        default = p.get("default")
        params.append(
            Parameter(
                name=p["name"],
                type=str(p.get("type", "")),
                default=None if default is None else str(default),
                details=str(p.get("details", "")),
            )
        )
    return tuple(params)


def _entry(d: dict, row: int) -> SyntaxEntry:
    if not isinstance(d, dict):
        raise SchemaError("expected an object", row)
    for key in ("full_name", "short_name"):
        if not isinstance(d.get(key), str) or not d[key].strip():
            raise SchemaError(f"{key} must be a non-empty string", row)
    return SyntaxEntry(
        full_name=d["full_name"].strip(),
        short_name=d["short_name"].strip(),
        description=str(d.get("description") or ""),
        output_type=str(d.get("output_type") or ""),
        parameters=_parameters(d.get("parameters", []), row),
    )


def load_syntax(path: str | os.PathLike) -> list[SyntaxEntry]:
    """Read a syntax table from CSV or (``.json``) a JSON array of objects.

    Row numbers in errors count the CSV header as row 1.
    """
    path = Path(path)
    entries: list[tuple[int, SyntaxEntry]] = []
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc.msg})") from None
        if not isinstance(data, list):
            raise SchemaError(f"{path}: expected a JSON array")
        entries = [(i, _entry(d, i)) for i, d in enumerate(data, 1)]
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise SchemaError(f"{path}: empty file, header missing")
            if header != SYNTAX_HEADER:
                raise SchemaError(f"{path}: expected header {','.join(SYNTAX_HEADER)}", 1)
            for row_no, row in enumerate(reader, 2):
                if not row:
                    continue
                if len(row) != len(SYNTAX_HEADER):
                    raise SchemaError(f"expected {len(SYNTAX_HEADER)} columns, found {len(row)}", row_no)
                entries.append((row_no, _entry(dict(zip(SYNTAX_HEADER, row)), row_no)))
    seen: dict[str, int] = {}
    dupes = []
    for row_no, e in entries:
        if e.full_name in seen:
            dupes.append(e.full_name)
        seen.setdefault(e.full_name, row_no)
    if dupes:
        raise SchemaError(f"duplicate full_name: {', '.join(sorted(set(dupes)))}")
    return [e for _, e in entries]


def write_syntax_csv(entries: Iterable[SyntaxEntry], path: str | os.PathLike) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SYNTAX_HEADER)
        for n, e in enumerate(entries, 1):
            params = json.dumps([p.to_dict() for p in e.parameters], ensure_ascii=False)
            w.writerow([n, e.full_name, e.short_name, e.description, e.output_type, params])
    return n


def check_known(occurrences: Iterable, entries: Iterable[SyntaxEntry]) -> dict:
    """Count occurrences whose name resolves against the syntax table.

    A name is known when its canonical form equals some ``full_name`` or
    its short name equals the last dotted segment of some entry's
    ``short_name``. Matching is exact and case-sensitive. Occurrences may
    be operator occurrences or ``(canonical_name, short_name)`` pairs;
    dynamic calls are not counted.
    """
    entries = list(entries)
    full = {e.full_name for e in entries}
    tails = {e.tail for e in entries}
    known = 0
    unknown: list[str] = []
    for occ in occurrences:
        if isinstance(occ, str):
            canonical, short = occ, occ.rsplit(".", 1)[-1]
        elif isinstance(occ, tuple):
            canonical, short = occ
        else:
            canonical, short = occ.canonical_name, occ.short_name
        if canonical == DYNAMIC:
            continue
        if canonical in full or short in tails:
            known += 1
        else:
            unknown.append(canonical)
    return {
        "known": known,
        "unknown": sorted(set(unknown)),
        "unknown_occurrences": len(unknown),
    }
