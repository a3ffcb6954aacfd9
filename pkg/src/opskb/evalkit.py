"""Scoring extracted relations and chains against ground truth.

All ratios are computed as exact fractions and only rounded when a report
is printed. Undefined ratios (zero denominators) are ``None``.
"""

from __future__ import annotations

import csv
import json
import math
import os
from collections import Counter, defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .chains import chain_tokens
from .relations import RelationInstance, Relationship, canonical_key
from .retrieval import Embedder, HashingEmbedder

__all__ = [
    "MetricRow",
    "TRUTH_HEADER",
    "coefficient_of_variation",
    "embedding_similarity",
    "evaluate_chains",
    "evaluate_relations",
    "lcs_length",
    "lcs_similarity",
    "ngram_similarity",
    "read_relation_sets",
    "round2",
    "score_relations",
    "write_relation_sets",
]

TRUTH_HEADER = ["script_name", "operator", "related_operator", "relationship"]
RELATION_METRICS = ("accuracy", "recall", "precision", "f1")


def _ratio(num, den) -> Fraction | None:
    return None if den == 0 else Fraction(num) / Fraction(den)


def round2(x) -> str | None:
    """Half-up rounding to two decimals, as printed in score tables."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        d = Decimal(x.numerator) / Decimal(x.denominator)
    else:
        d = Decimal(repr(float(x)))
    return str(d.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class MetricRow:
    script_name: str
    tp: int
    fp: int
    fn: int

    @property
    def accuracy(self) -> Fraction | None:
        return _ratio(self.tp, self.tp + self.fp + self.fn)

    @property
    def recall(self) -> Fraction | None:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def precision(self) -> Fraction | None:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def f1(self) -> Fraction | None:
        p, r = self.precision, self.recall
        if p is None or r is None or p + r == 0:
            return None
        return 2 * p * r / (p + r)

    def to_dict(self, digits: bool = True) -> dict:
        d: dict = {"script_name": self.script_name, "TP": self.tp, "FP": self.fp, "FN": self.fn}
        for m in RELATION_METRICS:
            v = getattr(self, m)
            d[m] = round2(v) if digits else (None if v is None else float(v))
        return d


def _keys(rels: Iterable) -> set[RelationInstance]:
    return {canonical_key(a, b, rel) for a, b, rel in rels}


def score_relations(predicted: Iterable, truth: Iterable, script_name: str = "") -> MetricRow:
    pred, gold = _keys(predicted), _keys(truth)
    return MetricRow(script_name, len(pred & gold), len(pred - gold), len(gold - pred))


def _mean(values: Sequence[Fraction]) -> Fraction | None:
    return sum(values, Fraction(0)) / len(values) if values else None


def coefficient_of_variation(values: Iterable) -> float | None:
    """Population standard deviation over the mean; None when the mean is 0."""
    vals = [Fraction(v) if not isinstance(v, float) else Fraction(repr(v)) for v in values if v is not None]
    if not vals:
        return None
    mu = _mean(vals)
    if mu == 0:
        return None
    var = sum(((v - mu) ** 2 for v in vals), Fraction(0)) / len(vals)
    return math.sqrt(var) / float(mu)


# -- chain similarity ------------------------------------------------------------


def lcs_length(a: Sequence, b: Sequence) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def lcs_similarity(pred: Sequence, truth: Sequence, normalizer: str = "max") -> Fraction | None:
    """LCS length over max length (``normalizer="mean"``: over mean length)."""
    if not pred and not truth:
        return None
    n = lcs_length(pred, truth)
    if normalizer == "max":
        return Fraction(n, max(len(pred), len(truth)))
    if normalizer == "mean":
        return Fraction(2 * n, len(pred) + len(truth))
    raise ValueError(f"unknown LCS normalizer {normalizer!r}")


def _grams(text: str, n: int) -> Counter:
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def ngram_similarity(pred: str, truth: str, n: int = 3, coef: str = "dice") -> Fraction | None:
    """Character n-gram overlap, counted over multisets."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = _grams(pred, n), _grams(truth, n)
    size_a, size_b = sum(a.values()), sum(b.values())
    if size_a == 0 and size_b == 0:
        return None
    inter = sum((a & b).values())
    if coef == "dice":
        return Fraction(2 * inter, size_a + size_b)
    if coef == "jaccard":
        return Fraction(inter, sum((a | b).values()))
    raise ValueError(f"unknown n-gram coefficient {coef!r}")


def embedding_similarity(pred: str, truth: str, embedder: Embedder | None = None) -> tuple[float, str]:
    """Cosine of the two embeddings, with the embedder's tag."""
    emb = embedder or HashingEmbedder()
    va, vb = emb.embed_many([pred, truth])
    cos = float(np.clip(np.dot(va, vb), -1.0, 1.0))
    return cos, emb.tag


# -- files and reports -------------------------------------------------------------


def read_relation_sets(path: str | os.PathLike) -> dict[str, set[RelationInstance]]:
    """Per-script relation sets from ``script_name,operator,related_operator,relationship``."""
    out: dict[str, set[RelationInstance]] = defaultdict(set)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != TRUTH_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRUTH_HEADER)}")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            try:
                out[row[0]].add(canonical_key(row[1], row[2], Relationship(row[3])))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return dict(out)


def write_relation_sets(sets: Mapping[str, Iterable], path: str | os.PathLike) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRUTH_HEADER)
        for name in sorted(sets):
            for k in sorted(_keys(sets[name]), key=lambda k: (k.relationship.value, k.operator, k.related_operator)):
                w.writerow([name, k.operator, k.related_operator, k.relationship.value])
                n += 1
    return n


def _summary(rows: list[dict], metrics: Sequence[str]) -> tuple[dict, dict]:
    means, cvs = {}, {}
    for m in metrics:
        vals = [r[m] for r in rows if r[m] is not None]
        means[m] = None if not vals else float(_mean(vals))
        cvs[m] = coefficient_of_variation(vals)
    return means, cvs


def evaluate_relations(pred: Mapping[str, set], truth: Mapping[str, set]) -> dict:
    """Score every script named in the truth file.

    Scripts missing from the predictions count as predicting nothing.
    """
    rows = [score_relations(pred.get(name, ()), truth[name], name) for name in sorted(truth)]
    exact = [{m: getattr(r, m) for m in RELATION_METRICS} for r in rows]
    means, cvs = _summary(exact, RELATION_METRICS)
    return {
        "kind": "relations",
        "rows": [r.to_dict() for r in rows],
        "mean": {m: round2(v) for m, v in means.items()},
        "cv": {m: round2(v) for m, v in cvs.items()},
        "unscored_predictions": sorted(set(pred) - set(truth)),
    }


def evaluate_chains(
    pred: Mapping[str, str],
    truth: Mapping[str, str],
    *,
    ngram_n: int = 3,
    ngram_coef: str = "dice",
    lcs_normalizer: str = "max",
    embedder: Embedder | None = None,
) -> dict:
    emb = embedder or HashingEmbedder()
    rows, exact = [], []
    for name in sorted(truth):
        p, t = pred.get(name, ""), truth[name]
        lcs = lcs_similarity(chain_tokens(p), chain_tokens(t), lcs_normalizer)
        ng = ngram_similarity(p, t, ngram_n, ngram_coef)
        es = embedding_similarity(p, t, emb)[0] if p.strip() and t.strip() else None
        exact.append({"lcs": lcs, "ngram": ng, "embedding": es})
        rows.append({"script_name": name, "lcs": round2(lcs), "ngram": round2(ng), "embedding": round2(es)})
    means, cvs = _summary(exact, ("lcs", "ngram", "embedding"))
    return {
        "kind": "chains",
        "settings": {
            "lcs_normalizer": lcs_normalizer,
            "ngram_n": ngram_n,
            "ngram_coef": ngram_coef,
            "embedder": emb.tag,
        },
        "rows": rows,
        "mean": {m: round2(v) for m, v in means.items()},
        "cv": {m: round2(v) for m, v in cvs.items()},
    }


def write_report(report: dict, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
