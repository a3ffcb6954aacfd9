"""Script corpus loading, cleaning and bookkeeping.

Records move through ``raw -> cleaned -> (validated | rejected)``; a raw
record may also be rejected directly (encoding, size, duplicates).
Corpora are persisted as JSON lines, one :class:`ScriptRecord` per line.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .comments import strip_comments, strip_comments_with_warnings

__all__ = [
    "DEFAULT_MAX_BYTES",
    "CorpusStats",
    "Stage",
    "ScriptRecord",
    "StageError",
    "clean",
    "corpus_stats",
    "ingest",
    "read_jsonl",
    "strip_comments",
    "write_jsonl",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_BYTES = 2 * 1024 * 1024


class Stage(str, enum.Enum):
    RAW = "raw"
    CLEANED = "cleaned"
    VALIDATED = "validated"
    REJECTED = "rejected"


_ALLOWED = {
    Stage.RAW: {Stage.CLEANED, Stage.REJECTED},
    Stage.CLEANED: {Stage.VALIDATED, Stage.REJECTED},
    Stage.VALIDATED: set(),
    Stage.REJECTED: set(),
}


class StageError(ValueError):
    """Raised on a backwards or otherwise illegal stage transition."""


@dataclass(frozen=True)
class ScriptRecord:
    script_id: str
    source_path: str
    text: str
    byte_size: int
    stage: Stage = Stage.RAW
    reject_reason: str | None = None

    @classmethod
    def from_text(cls, script_id: str, source_path: str, text: str, **kw) -> "ScriptRecord":
        return cls(script_id, source_path, text, len(text.encode("utf-8")), **kw)

    def advance(self, stage: Stage, *, text: str | None = None, reason: str | None = None) -> "ScriptRecord":
        """Return a copy moved forward to *stage*."""
        stage = Stage(stage)
        if stage not in _ALLOWED[self.stage]:
            raise StageError(f"{self.script_id}: cannot move from {self.stage.value} to {stage.value}")
        if stage is Stage.REJECTED and not reason:
            raise StageError("rejection needs a reason")
        changes: dict = {"stage": stage, "reject_reason": reason if stage is Stage.REJECTED else None}
        if text is not None:
            changes["text"] = text
            changes["byte_size"] = len(text.encode("utf-8"))
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "script_id": self.script_id,
            "source_path": self.source_path,
            "text": self.text,
            "byte_size": self.byte_size,
            "stage": self.stage.value,
            "reject_reason": self.reject_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScriptRecord":
        try:
            rec = cls(
                script_id=str(d["script_id"]),
                source_path=str(d["source_path"]),
                text=d["text"],
                byte_size=int(d["byte_size"]),
                stage=Stage(d["stage"]),
                reject_reason=d.get("reject_reason"),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"malformed corpus record: {exc}") from exc
        if rec.byte_size != len(rec.text.encode("utf-8")):
            raise ValueError(f"{rec.script_id}: byte_size does not match text")
        return rec


@dataclass(frozen=True)
class CorpusStats:
    script_count: int = 0
    total_bytes: int = 0
    min_bytes: int = 0
    max_bytes: int = 0
    rejected_count: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _iter_files(root: Path, extensions: Sequence[str]) -> list[Path]:
    suffixes = tuple(e if e.startswith(".") else "." + e for e in extensions)
    found = []
    for dirpath, _dirs, files in os.walk(root, onerror=_raise):
        for name in files:
            if name.endswith(suffixes):
                found.append(Path(dirpath) / name)
    return found


def _raise(err: OSError) -> None:
    raise err


def _load_one(path: Path, root: Path, max_bytes: int) -> ScriptRecord:
    rel = path.relative_to(root).as_posix()
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        text = raw.decode("utf-8", errors="replace")
        return ScriptRecord.from_text(rel, str(path), text, stage=Stage.REJECTED, reject_reason="encoding")
    if text.startswith("\ufeff"):
        text = text[1:]
    rec = ScriptRecord.from_text(rel, str(path), text)
    if rec.byte_size > max_bytes:
        return rec.advance(Stage.REJECTED, reason="oversize")
    return rec


def ingest(
    directory: str | os.PathLike,
    extensions: Sequence[str] = (".js",),
    *,
    max_bytes: int = DEFAULT_MAX_BYTES,
    dedup: bool = False,
    workers: int = 1,
) -> list[ScriptRecord]:
    """Load every file under *directory* whose name ends with one of *extensions*.

    Records are sorted by their path relative to *directory* (the script id),
    so the result does not depend on filesystem enumeration order.
    """
    root = Path(directory)
    if not extensions:
        raise ValueError("extensions must not be empty")
    if not root.is_dir():
        raise NotADirectoryError(f"not a readable directory: {root}")
    paths = sorted(_iter_files(root, extensions), key=lambda p: p.relative_to(root).as_posix())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda p: _load_one(p, root, max_bytes), paths))
    else:
        records = [_load_one(p, root, max_bytes) for p in paths]
    if dedup:
        records = _dedup(records)
    return records


def _dedup(records: list[ScriptRecord]) -> list[ScriptRecord]:
    seen: dict[str, str] = {}
    out = []
    for rec in records:
        if rec.stage is Stage.RAW:
            digest = hashlib.sha256(rec.text.encode("utf-8")).hexdigest()
            if digest in seen:
                log.info("%s duplicates %s", rec.script_id, seen[digest])
                rec = rec.advance(Stage.REJECTED, reason="duplicate")
            else:
                seen[digest] = rec.script_id
        out.append(rec)
    return out


def _clean_one(rec: ScriptRecord) -> ScriptRecord:
    if rec.stage is not Stage.RAW:
        return rec
    text, warnings = strip_comments_with_warnings(rec.text)
    for w in warnings:
        log.warning("%s: %s", rec.script_id, w)
    return rec.advance(Stage.CLEANED, text=text)


def clean(records: Iterable[ScriptRecord], workers: int = 1) -> list[ScriptRecord]:
    """Strip comments from every raw record; other stages pass through."""
    records = list(records)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_clean_one, records))
    return [_clean_one(r) for r in records]


def corpus_stats(records: Iterable[ScriptRecord]) -> CorpusStats:
    count = total = rejected = 0
    lo: int | None = None
    hi: int | None = None
    for rec in records:
        count += 1
        total += rec.byte_size
        lo = rec.byte_size if lo is None else min(lo, rec.byte_size)
        hi = rec.byte_size if hi is None else max(hi, rec.byte_size)
        if rec.stage is Stage.REJECTED:
            rejected += 1
    return CorpusStats(count, total, lo or 0, hi or 0, rejected)


def write_jsonl(records: Iterable[ScriptRecord], path: str | os.PathLike) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def iter_jsonl(path: str | os.PathLike) -> Iterator[ScriptRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                yield ScriptRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc


def read_jsonl(path: str | os.PathLike) -> list[ScriptRecord]:
    return list(iter_jsonl(path))
