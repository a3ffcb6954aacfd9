"""Random canonical chains."""

from __future__ import annotations

import random

from opskb.chains import Leaf, Nest, Par, Seq, par, seq

OPS = ["ee.Image", "ee.ImageCollection", "map", "filterBounds", "Map.addLayer", "select", "ee.Geometry.Point", "clip", "$fn", "Export.image.toDrive"]


def random_chain(rng: random.Random, depth: int = 4):
    r = rng.random()
    if depth == 0 or r < 0.35:
        return Leaf(rng.choice(OPS))
    if r < 0.6:
        return seq(*(random_chain(rng, depth - 1) for _ in range(rng.randint(2, 4))))
    if r < 0.85:
        return par(*(random_chain(rng, depth - 1) for _ in range(rng.randint(2, 3))))
    return Nest(Leaf(rng.choice(OPS)), random_chain(rng, depth - 1))


def is_canonical(c) -> bool:
    if isinstance(c, Leaf):
        return bool(c.name)
    if isinstance(c, Seq):
        return len(c.children) >= 2 and all(not isinstance(x, Seq) and is_canonical(x) for x in c.children)
    if isinstance(c, Par):
        from opskb.chains import serialize

        keys = [serialize(b) for b in c.branches]
        return len(c.branches) >= 2 and keys == sorted(keys) and all(not isinstance(b, Par) and is_canonical(b) for b in c.branches)
    return isinstance(c, Nest) and isinstance(c.head, Leaf) and is_canonical(c.body)
