"""Embedding, exact cosine search and prompt assembly over the knowledge tables."""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import httpx
import numpy as np

from .errors import ConsistencyError

__all__ = [
    "DEFAULT_DIM",
    "DEFAULT_PROBES",
    "EmbeddingError",
    "HashingEmbedder",
    "HttpEmbedder",
    "KbEntry",
    "LlmClient",
    "RetrievalHit",
    "Table",
    "VectorIndex",
    "assemble_prompt",
    "attach_vectors",
    "build_index",
    "default_template",
    "embed",
    "entries_from_tables",
    "get_embedder",
    "load_kb",
    "render_itemset",
    "render_relation",
    "render_syntax",
    "save_kb",
    "tokenize",
]

log = logging.getLogger(__name__)

DEFAULT_DIM = 512
DEFAULT_PROBES = 4
DEFAULT_K = 5
NO_CONTEXT = "(no knowledge retrieved)"
EMBED_URL_ENV = "OPSKB_EMBED_URL"
LLM_URL_ENV = "OPSKB_LLM_URL"
KB_FILE = "kb.jsonl"


class Table(str, enum.Enum):
    SYNTAX = "syntax"
    RELATION = "relation"
    ITEMSET = "itemset"
    CHAIN = "chain"


_TABLE_TITLES = {
    Table.SYNTAX: "Operator syntax",
    Table.RELATION: "Operator relationships",
    Table.ITEMSET: "Frequent operator combinations",
    Table.CHAIN: "Operator relationship chains",
}


class EmbeddingError(RuntimeError):
    """An external embedding or generation call failed; worth retrying later."""


# -- embedders -----------------------------------------------------------------


class Embedder(Protocol):
    tag: str

    def embed_many(self, texts: Sequence[str]) -> np.ndarray: ...


_WORD = re.compile(r"[\w$]+")


def tokenize(text: str) -> list[str]:
    """Lower-cased word tokens; dotted names split into their segments."""
    return _WORD.findall(text.lower())


class HashingEmbedder:
    """Signed feature hashing of unigrams and bigrams with TF weights.

    Each feature lands in ``probes`` slots, which keeps chance collisions
    between unrelated texts close to Gaussian. Deterministic across
    processes: the hash is a keyed BLAKE2b, not Python's salted ``hash``.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0, probes: int = DEFAULT_PROBES):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        if not 1 <= probes <= 8:
            raise ValueError("probes must lie in [1, 8]")
        self.dim = dim
        self.seed = seed
        self.probes = probes
        self._key = seed.to_bytes(8, "little")
        self.tag = f"builtin-hash-{dim}x{probes}-s{seed}"

    def _slots(self, feature: str) -> list[tuple[int, float]]:
        h = hashlib.blake2b(feature.encode("utf-8"), digest_size=8 * self.probes, key=self._key).digest()
        out = []
        for k in range(self.probes):
            v = int.from_bytes(h[8 * k : 8 * k + 8], "little")
            out.append((v % self.dim, 1.0 if (v >> 63) & 1 else -1.0))
        return out

    def embed_one(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise ValueError("cannot embed empty text")
        toks = tokenize(text)
        feats = toks + [f"{a} {b}" for a, b in zip(toks, toks[1:])]
        vec = np.zeros(self.dim, dtype=np.float64)
        for f in feats:
            for j, sign in self._slots(f):
                vec[j] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # text without word characters: fall back to the raw string
            for j, sign in self._slots("\x00" + text):
                vec[j] += sign
            norm = np.linalg.norm(vec)
            if norm == 0.0:  # every probe cancelled out
                vec[0], norm = 1.0, 1.0
        return vec / norm

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return np.vstack([self.embed_one(t) for t in texts])


def _post_with_retry(url: str, payload: dict, timeout: float, retries: int = 2) -> dict:
    last: Exception | None = None
    for attempt in range(retries + 1):
        try:
            resp = httpx.post(url, json=payload, timeout=timeout)
            resp.raise_for_status()
            return resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            last = exc
            if attempt < retries:
                time.sleep(0.5 * 2**attempt)
    raise EmbeddingError(f"request to {url} failed after {retries + 1} attempts: {last}") from last


class HttpEmbedder:
    """Client for an external ``/embed`` service."""

    def __init__(self, base_url: str, timeout: float = 30.0, retries: int = 2):
        self.url = base_url.rstrip("/") + "/embed"
        self.timeout = timeout
        self.retries = retries
        self.tag = f"http:{base_url.rstrip('/')}"

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        if any(not t or not t.strip() for t in texts):
            raise ValueError("cannot embed empty text")
        data = _post_with_retry(self.url, {"texts": list(texts)}, self.timeout, self.retries)
        try:
            vecs = np.asarray(data["vectors"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed response from {self.url}: {exc}") from exc
        if vecs.ndim != 2 or vecs.shape[0] != len(texts):
            raise EmbeddingError(f"{self.url} returned {vecs.shape} for {len(texts)} texts")
        norms = np.linalg.norm(vecs, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise EmbeddingError(f"{self.url} returned a zero vector")
        return vecs / norms


def get_embedder(env: Mapping[str, str] | None = None) -> Embedder:
    env = os.environ if env is None else env
    url = env.get(EMBED_URL_ENV)
    return HttpEmbedder(url) if url else HashingEmbedder()


def embed(text: str, embedder: Embedder | None = None) -> np.ndarray:
    if not text or not text.strip():
        raise ValueError("cannot embed empty text")
    emb = embedder or get_embedder()
    return emb.embed_many([text])[0]


class LlmClient:
    """Optional generation endpoint: POST {"prompt"} -> {"text"}."""

    def __init__(self, url: str | None = None, timeout: float = 30.0, retries: int = 2):
        url = url or os.environ.get(LLM_URL_ENV)
        if not url:
            raise ValueError(f"no LLM endpoint configured (set {LLM_URL_ENV})")
        self.url = url
        self.timeout = timeout
        self.retries = retries

    def generate(self, prompt: str) -> str:
        data = _post_with_retry(self.url, {"prompt": prompt}, self.timeout, self.retries)
        if not isinstance(data, dict) or not isinstance(data.get("text"), str):
            raise EmbeddingError(f"malformed response from {self.url}")
        return data["text"]


# -- entries and index -----------------------------------------------------------


@dataclass(frozen=True)
class KbEntry:
    entry_id: str
    table: Table
    text: str
    vector: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"{self.entry_id}: empty entry text")


@dataclass(frozen=True)
class RetrievalHit:
    entry_id: str
    score: float
    rank: int


def render_syntax(e) -> str:
    return f"{e.full_name}: {e.description} (returns {e.output_type})"


def render_relation(r) -> str:
    rel = getattr(r.relationship, "value", r.relationship)
    return f"{r.operator} {rel} related to {r.related_operator} (frequency {r.frequency})"


def render_itemset(s) -> str:
    return " ".join(sorted(s.items))


def entries_from_tables(
    syntax: Iterable = (),
    relations: Iterable = (),
    itemsets: Iterable = (),
    chains: Mapping[str, str] | Iterable[tuple[str, str]] = (),
) -> list[KbEntry]:
    """Render table rows to text entries (vectors are attached later)."""
    out = [KbEntry(f"syntax:{i}", Table.SYNTAX, render_syntax(e)) for i, e in enumerate(syntax, 1)]
    out += [KbEntry(f"relation:{i}", Table.RELATION, render_relation(r)) for i, r in enumerate(relations, 1)]
    out += [KbEntry(f"itemset:{i}", Table.ITEMSET, render_itemset(s)) for i, s in enumerate(itemsets, 1)]
    pairs = chains.items() if isinstance(chains, Mapping) else chains
    out += [KbEntry(f"chain:{name}", Table.CHAIN, text) for name, text in pairs]
    return out


def attach_vectors(entries: Sequence[KbEntry], embedder: Embedder, batch: int = 256) -> list[KbEntry]:
    out = []
    for s in range(0, len(entries), batch):
        part = entries[s : s + batch]
        vecs = embedder.embed_many([e.text for e in part])
        out += [KbEntry(e.entry_id, e.table, e.text, tuple(map(float, v))) for e, v in zip(part, vecs)]
    return out


class VectorIndex:
    """Exact cosine search over unit vectors held in one dense matrix."""

    def __init__(self, entries: Sequence[KbEntry], tag: str = ""):
        self.entries = list(entries)
        self.tag = tag
        ids = [e.entry_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ConsistencyError("duplicate entry_id in index")
        if any(e.vector is None for e in self.entries):
            raise ValueError("every entry needs a vector before indexing")
        dims = {len(e.vector) for e in self.entries}
        if len(dims) > 1:
            raise ValueError(f"dimension mismatch in index: {sorted(dims)}")
        self.dim = dims.pop() if dims else 0
        if self.entries:
            m = np.asarray([e.vector for e in self.entries], dtype=np.float64)
            norms = np.linalg.norm(m, axis=1, keepdims=True)
            norms[norms == 0] = 1.0
            self.matrix = m / norms
        else:
            self.matrix = np.zeros((0, 0))
        self.by_id = {e.entry_id: e for e in self.entries}
        # position of each entry in entry_id order, used to break score ties
        self._id_rank = np.empty(len(ids), dtype=np.int64)
        self._id_rank[np.argsort(np.asarray(ids, dtype=object), kind="stable")] = np.arange(len(ids))

    def __len__(self) -> int:
        return len(self.entries)

    def search(self, query_vec, k: int = DEFAULT_K, per_table: int | None = None) -> list[RetrievalHit]:
        if not self.entries or k <= 0:
            return []
        q = np.asarray(query_vec, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"query dimension {q.shape} does not match index dimension {self.dim}")
        norm = np.linalg.norm(q)
        if norm == 0:
            raise ValueError("zero query vector")
        scores = np.clip(self.matrix @ (q / norm), -1.0, 1.0)
        order = np.lexsort((self._id_rank, -scores))
        hits: list[RetrievalHit] = []
        taken: dict[Table, int] = {}
        for i in order:
            e = self.entries[i]
            if per_table is not None:
                if taken.get(e.table, 0) >= per_table:
                    continue
                taken[e.table] = taken.get(e.table, 0) + 1
            hits.append(RetrievalHit(e.entry_id, float(scores[i]), len(hits) + 1))
            if len(hits) == k:
                break
        return hits

    def query(self, text: str, embedder: Embedder, k: int = DEFAULT_K, per_table: int | None = None) -> list[RetrievalHit]:
        return self.search(embedder.embed_many([text])[0], k, per_table)


def build_index(entries: Sequence[KbEntry], tag: str = "") -> VectorIndex:
    return VectorIndex(entries, tag)


def save_kb(entries: Iterable[KbEntry], path: str | os.PathLike, tag: str) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entries:
            rec = {"entry_id": e.entry_id, "table": e.table.value, "text": e.text, "embedder": tag, "vector": list(e.vector or ())}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return path


def load_kb(path: str | os.PathLike) -> tuple[list[KbEntry], str | None]:
    """Entries and the embedder tag they were built with."""
    entries = []
    tags = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                entries.append(KbEntry(rec["entry_id"], Table(rec["table"]), rec["text"], tuple(rec["vector"])))
                tags.add(rec.get("embedder"))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed kb entry ({exc})") from exc
    if len(tags) > 1:
        raise ConsistencyError(f"{path}: entries from several embedders: {sorted(map(str, tags))}")
    return entries, (tags.pop() if tags else None)


# -- prompts -------------------------------------------------------------------


def default_template() -> str:
    return resources.files("opskb").joinpath("templates/prompt.txt").read_text(encoding="utf-8")


def assemble_prompt(
    query: str,
    hits: Sequence[RetrievalHit],
    entries: Mapping[str, KbEntry] | Iterable[KbEntry],
    template: str | None = None,
) -> str:
    """Fill ``{query}`` and ``{context}`` in *template*.

    Hits are grouped under one heading per table; tables appear in the
    order of their best hit and entries keep rank order within a table.
    """
    by_id = entries if isinstance(entries, Mapping) else {e.entry_id: e for e in entries}
    template = default_template() if template is None else template
    groups: dict[Table, list[str]] = {}
    for hit in sorted(hits, key=lambda h: h.rank):
        e = by_id.get(hit.entry_id)
        if e is None:
            raise ConsistencyError(f"hit {hit.entry_id!r} does not resolve to a knowledge-base entry")
        groups.setdefault(e.table, []).append(f"{hit.rank}. {e.text}")
    if groups:
        context = "\n\n".join(f"[{_TABLE_TITLES[t]}]\n" + "\n".join(lines) for t, lines in groups.items())
    else:
        context = NO_CONTEXT
    # single pass so that braces inside the query are left alone
    return re.sub(r"\{(query|context)\}", lambda m: query if m.group(1) == "query" else context, template)
