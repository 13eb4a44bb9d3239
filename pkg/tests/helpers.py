"""Random canonical words, cycles and representations for round-trip tests."""

from __future__ import annotations

import random

from dbc.canon import BandData, StringData, build
from dbc.reps import direct_sum_all
from dbc.words import SIM, Cycle, Word, canonicalize, is_decorated, is_periodic, is_valid


def random_string(b, rng: random.Random, max_pairs: int = 3, max_d: int = 2) -> Word:
    while True:
        x = rng.choice(b.elements)
        letters, conns = [x], []
        if x in b.partner:
            letters.append(b.partner[x])
            conns.append(SIM)
        steps = rng.randint(0, max_pairs)
        for _ in range(steps):
            nbrs = sorted(b.adj[letters[-1]])
            if not nbrs:
                break
            y = rng.choice(nbrs)
            letters.append(y)
            conns.append(rng.randint(0, max_d))
            if y in b.partner:
                letters.append(b.partner[y])
                conns.append(SIM)
            else:
                break
        w = Word(tuple(letters), tuple(conns))
        if is_valid(b, w):
            return w


def random_cycle(b, rng: random.Random, max_pairs: int = 3, max_d: int = 2, tries: int = 200):
    starts = [x for x in b.elements if x in b.partner and b.adj[x]]
    for _ in range(tries):
        if not starts:
            return None
        x = rng.choice(starts)
        letters, conns = [x, b.partner[x]], [SIM]
        for _ in range(rng.randint(1, max_pairs)):
            nbrs = [y for y in sorted(b.adj[letters[-1]]) if y in b.partner]
            if not nbrs:
                break
            y = rng.choice(nbrs)
            letters += [y, b.partner[y]]
            conns += [rng.randint(0, max_d), SIM]
            if b.dash(letters[-1], letters[0]) and rng.random() < 0.6:
                break
        if not b.dash(letters[-1], letters[0]):
            continue
        W = Cycle(Word(tuple(letters), tuple(conns)), rng.randint(0, max_d))
        if not is_valid(b, W):
            continue
        # rescaling at non-decorated letters can expose a hidden period
        W = canonicalize(b, W)
        if not is_periodic(W):
            return W
    return None


def random_phi(field, decorated: bool, rng: random.Random):
    k = field.base
    lam = 0
    while lam == 0:
        lam = rng.randint(1, 6)
    if decorated:
        return (k(-lam), k(1))
    return (field(-lam), field.one)


def random_item(b, field, rng: random.Random, band_prob: float = 0.4):
    if rng.random() < band_prob:
        W = random_cycle(b, rng)
        if W is not None:
            return BandData(W, rng.randint(1, 2), random_phi(field, is_decorated(b, W), rng))
    return StringData(random_string(b, rng))


def random_sum(b, field, rng: random.Random, max_items: int = 3):
    items = [random_item(b, field, rng) for _ in range(rng.randint(1, max_items))]
    return items, direct_sum_all(b, field, [build(b, field, it) for it in items])


def expected_report(b, field, items):
    """The decomposition of a direct sum of canonicals, item by item."""
    from dbc.reduce import DecompositionReport
    strings = [it for it in items if isinstance(it, StringData)]
    bands = [it for it in items if isinstance(it, BandData)]
    return DecompositionReport(strings, bands, 0, [])


def all_cycles(b, max_len: int, ds=(0, 1)) -> list:
    """Every canonical non-periodic cycle of at most ``max_len`` letters whose
    dashes carry decorations from ``ds``."""
    found = set()

    def walk(letters, conns):
        if len(letters) > max_len:
            return
        if b.dash(letters[-1], letters[0]):
            for d in ds:
                W = Cycle(Word(tuple(letters), tuple(conns)), d)
                if is_valid(b, W):
                    W = canonicalize(b, W)
                    if not is_periodic(W):
                        found.add(W)
        for y in sorted(b.adj[letters[-1]]):
            if y in b.partner:
                for d in ds:
                    walk(letters + [y, b.partner[y]], conns + [d, SIM])

    for x in b.elements:
        if x in b.partner:
            walk([x, b.partner[x]], [SIM])
    return sorted(found, key=str)


def random_rep(b, field, rng: random.Random, max_size: int = 3):
    """A representation with random sizes and random Laurent monomial entries."""
    from dbc.linalg import Matrix
    from dbc.reps import Representation
    sizes = {}
    for c in b.sim_classes:
        n = rng.randint(0, max_size)
        for x in c:
            sizes[x] = n
    blocks = {}
    for x, y in b.dash_pairs_EF():
        rows = [[field.monomial(rng.randint(-3, 3), rng.randint(-2, 3)) if rng.random() < 0.7 else field.zero
                 for _ in range(sizes[y])] for _ in range(sizes[x])]
        blocks[(x, y)] = Matrix(field, rows, sizes[x], sizes[y])
    return Representation(b, field, sizes, blocks)
