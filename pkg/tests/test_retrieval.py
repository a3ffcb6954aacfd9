from __future__ import annotations

import random

import httpx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cosine_topk
from opskb import retrieval
from opskb.errors import ConsistencyError
from opskb.retrieval import (
    NO_CONTEXT,
    EmbeddingError,
    HashingEmbedder,
    HttpEmbedder,
    KbEntry,
    LlmClient,
    RetrievalHit,
    Table,
    assemble_prompt,
    attach_vectors,
    build_index,
    embed,
    entries_from_tables,
    get_embedder,
    load_kb,
    save_kb,
)


def _word(rng: random.Random, alphabet: str) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(3, 8)))


def _random_entries(rng: random.Random, n: int, dim: int = 32) -> list[KbEntry]:
    tables = list(Table)
    out = []
    for i in range(n):
        v = np.array([rng.gauss(0, 1) for _ in range(dim)])
        out.append(KbEntry(f"e{i:04d}", rng.choice(tables), f"entry {i}", tuple(v / np.linalg.norm(v))))
    return out


# -- embedder ---------------------------------------------------------------------


def test_builtin_embedder_deterministic_and_unit():
    emb = HashingEmbedder()
    a = emb.embed_one("ee.Image normalizedDifference Map.addLayer")
    b = HashingEmbedder().embed_one("ee.Image normalizedDifference Map.addLayer")
    assert np.array_equal(a, b)
    assert a.shape == (512,)
    assert abs(np.linalg.norm(a) - 1) < 1e-6
    assert abs(float(a @ a) - 1) < 1e-6


def test_empty_text_rejected():
    with pytest.raises(ValueError):
        embed("  ", HashingEmbedder())
    with pytest.raises(ValueError):
        HashingEmbedder().embed_one("")


def test_disjoint_vocabulary_pairs_are_near_orthogonal():
    rng = random.Random(0)
    emb = HashingEmbedder()
    worst = 0.0
    for _ in range(100):
        left = " ".join(_word(rng, "abcdefghijklm") for _ in range(rng.randint(8, 20)))
        right = " ".join(_word(rng, "nopqrstuvwxyz") for _ in range(rng.randint(8, 20)))
        worst = max(worst, abs(float(emb.embed_one(left) @ emb.embed_one(right))))
    assert worst < 0.2


def test_get_embedder_reads_env():
    assert isinstance(get_embedder({}), HashingEmbedder)
    assert isinstance(get_embedder({"OPSKB_EMBED_URL": "http://x"}), HttpEmbedder)


class _FakePost:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def __call__(self, url, json=None, timeout=None):
        self.calls.append((url, json, timeout))
        r = self.responses.pop(0)
        if isinstance(r, Exception):
            raise r
        return httpx.Response(200, json=r, request=httpx.Request("POST", url))


def test_http_embedder_normalizes_and_retries(monkeypatch):
    fake = _FakePost([httpx.ConnectError("down"), {"vectors": [[3.0, 4.0], [0.0, 2.0]]}])
    monkeypatch.setattr(retrieval.httpx, "post", fake)
    monkeypatch.setattr(retrieval.time, "sleep", lambda s: None)
    vecs = HttpEmbedder("http://svc/").embed_many(["a", "b"])
    assert np.allclose(vecs, [[0.6, 0.8], [0.0, 1.0]])
    assert fake.calls[-1][0] == "http://svc/embed"
    assert fake.calls[-1][1] == {"texts": ["a", "b"]}
    assert fake.calls[-1][2] == 30.0


def test_http_embedder_gives_up(monkeypatch):
    fake = _FakePost([httpx.ConnectError("down")] * 3)
    monkeypatch.setattr(retrieval.httpx, "post", fake)
    monkeypatch.setattr(retrieval.time, "sleep", lambda s: None)
    with pytest.raises(EmbeddingError):
        HttpEmbedder("http://svc").embed_many(["a"])
    assert len(fake.calls) == 3


def test_llm_client(monkeypatch):
    fake = _FakePost([{"text": "var a = ee.Image(1);"}])
    monkeypatch.setattr(retrieval.httpx, "post", fake)
    assert LlmClient("http://llm").generate("p") == "var a = ee.Image(1);"
    assert fake.calls[0][1] == {"prompt": "p"}


# -- index ----------------------------------------------------------------------------


def test_single_entry_index():
    (e,) = attach_vectors([KbEntry("only", Table.SYNTAX, "ee.Image constructor")], HashingEmbedder())
    hits = build_index([e]).query("anything at all", HashingEmbedder())
    assert [h.entry_id for h in hits] == ["only"] and hits[0].rank == 1


def test_self_retrieval():
    emb = HashingEmbedder()
    texts = ["ee.Image -> clip", "map ~> { normalizedDifference }", "Map.addLayer sequential related to print"]
    entries = attach_vectors([KbEntry(f"c{i}", Table.CHAIN, t) for i, t in enumerate(texts)], emb)
    idx = build_index(entries)
    for e in entries:
        top = idx.query(e.text, emb, k=1)[0]
        assert top.entry_id == e.entry_id and abs(top.score - 1) < 1e-6


def test_exact_search_against_bruteforce():
    rng = random.Random(17)
    entries = _random_entries(rng, 500)
    idx = build_index(entries)
    m = np.array([e.vector for e in entries])
    ids = [e.entry_id for e in entries]
    for _ in range(50):
        q = np.array([rng.gauss(0, 1) for _ in range(32)])
        hits = idx.search(q, k=5)
        want = cosine_topk(m, ids, q, 5)
        assert [h.entry_id for h in hits] == [w[0] for w in want]
        assert np.allclose([h.score for h in hits], [w[1] for w in want], atol=1e-9)


def test_ties_break_by_entry_id():
    v = (1.0, 0.0)
    entries = [KbEntry(i, Table.ITEMSET, "x", v) for i in ["b", "c", "a"]]
    hits = build_index(entries).search([1.0, 0.0], k=3)
    assert [h.entry_id for h in hits] == ["a", "b", "c"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 8))
def test_search_properties(seed, k):
    rng = random.Random(seed)
    entries = _random_entries(rng, 40, dim=8)
    idx = build_index(entries)
    q1 = np.array([rng.gauss(0, 1) for _ in range(8)])
    q2 = np.array([rng.gauss(0, 1) for _ in range(8)])
    a1, a2 = idx.search(q1, k), idx.search(q2, k)
    b2, b1 = idx.search(q2, k), idx.search(q1, k)
    assert (a1, a2) == (b1, b2)
    assert all(-1 - 1e-9 <= h.score <= 1 + 1e-9 for h in a1)
    assert [h.rank for h in a1] == list(range(1, len(a1) + 1))
    keys = [(-h.score, h.entry_id) for h in a1]
    assert keys == sorted(keys)


def test_per_table_quota():
    rng = random.Random(3)
    entries = _random_entries(rng, 100)
    hits = build_index(entries).search(np.ones(32), k=10, per_table=1)
    tables = [next(e.table for e in entries if e.entry_id == h.entry_id) for h in hits]
    assert len(hits) == len(set(tables)) == len(Table)


def test_index_rejects_bad_input():
    with pytest.raises(ValueError):
        build_index([KbEntry("a", Table.CHAIN, "x", (1.0, 0.0)), KbEntry("b", Table.CHAIN, "y", (1.0,))])
    with pytest.raises(ValueError):
        build_index([KbEntry("a", Table.CHAIN, "x")])
    with pytest.raises(ConsistencyError):
        build_index([KbEntry("a", Table.CHAIN, "x", (1.0,)), KbEntry("a", Table.CHAIN, "y", (1.0,))])


def test_kb_round_trip(tmp_path):
    emb = HashingEmbedder()
    entries = attach_vectors(entries_from_tables(chains={"s.js": "a -> b"}), emb)
    save_kb(entries, tmp_path / "kb.jsonl", emb.tag)
    back, tag = load_kb(tmp_path / "kb.jsonl")
    assert back == entries and tag == emb.tag


# -- prompts ------------------------------------------------------------------------------


def test_empty_context_marker():
    prompt = assemble_prompt("compute NDVI", [], {})
    assert "compute NDVI" in prompt and NO_CONTEXT in prompt


def test_sections_in_rank_order():
    entries = [
        KbEntry("syntax:1", Table.SYNTAX, "ee.Image: An image. (returns Image)"),
        KbEntry("chain:s", Table.CHAIN, "ee.Image -> clip"),
    ]
    hits = [RetrievalHit("chain:s", 0.9, 1), RetrievalHit("syntax:1", 0.5, 2)]
    prompt = assemble_prompt("q {context}", hits, entries, template="{context}\n--\n{query}")
    chain_at, syntax_at = prompt.index("ee.Image -> clip"), prompt.index("ee.Image: An image")
    assert chain_at < syntax_at
    assert prompt.count("[") == 2
    assert prompt.endswith("--\nq {context}")
    assert assemble_prompt("q {context}", hits, entries, template="{context}\n--\n{query}") == prompt


def test_unresolved_hit():
    with pytest.raises(ConsistencyError):
        assemble_prompt("q", [RetrievalHit("missing", 1.0, 1)], [])


def test_default_template_has_slots():
    t = retrieval.default_template()
    assert "{query}" in t and "{context}" in t


def test_entry_rendering():
    from opskb.relations import OperatorRelation, Relationship
    from opskb.syntax_kb import SyntaxEntry
    from opskb.miner import Itemset
    from fractions import Fraction

    es = entries_from_tables(
        [SyntaxEntry("ee.Image", "ee.Image", "An image.", "Image", ())],
        [OperatorRelation("a", "b", Relationship.SEQUENTIAL, 3)],
        [Itemset(("b", "a"), Fraction(1, 2))],
        [("s.js", "a -> b")],
    )
    assert [e.text for e in es] == [
        "ee.Image: An image. (returns Image)",
        "a sequential related to b (frequency 3)",
        "a b",
        "a -> b",
    ]
    assert [e.entry_id for e in es] == ["syntax:1", "relation:1", "itemset:1", "chain:s.js"]
