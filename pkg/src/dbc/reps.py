"""Representations of a decorated bunch, morphisms and the moves T1 / T2.

A representation assigns a size m_x to every element and a block M_xy over
K = k(z) to every dash pair (x in E, y in F).  Blocks are stored densely.

Morphisms are stored with their *effective* off-diagonal blocks: a block
S_xy with y strictly below x in the decorated order must itself lie in zD,
rather than being an arbitrary D-matrix that gets multiplied by z.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .bunch import DecoratedBunch, Violation
from .linalg import Matrix, NotInvertible, ShapeMismatch, block_diag, inverse, is_D_invertible
from .scalars import FunctionField


class IllegalPair(ValueError):
    pass


class BunchMismatch(ValueError):
    pass


class EConditionViolated(ValueError):
    pass


class Representation:
    """Sizes and dash blocks; treat as immutable."""

    __slots__ = ("bunch", "field", "sizes", "blocks")

    def __init__(self, bunch: DecoratedBunch, field: FunctionField, sizes: dict, blocks: dict | None = None):
        self.bunch = bunch
        self.field = field
        self.sizes = {x: int(sizes.get(x, 0)) for x in bunch.elements}
        for x in sizes:
            if x not in self.sizes:
                self.sizes[x] = int(sizes[x])
        blocks = dict(blocks or {})
        for x, y in bunch.dash_pairs_EF():
            if (x, y) not in blocks:
                blocks[(x, y)] = Matrix.zeros(field, self.sizes[x], self.sizes[y])
        self.blocks = blocks

    def block(self, x, y) -> Matrix:
        return self.blocks[(x, y)]

    def size(self, x) -> int:
        return self.sizes.get(x, 0)

    def total_size(self) -> int:
        return sum(self.sizes.values())

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.blocks.values())

    def with_blocks(self, updates: dict) -> "Representation":
        blocks = dict(self.blocks)
        blocks.update(updates)
        return Representation(self.bunch, self.field, self.sizes, blocks)

    def support(self) -> list:
        return [x for x in self.bunch.elements if self.sizes.get(x, 0) > 0]

    def __eq__(self, other):
        if not isinstance(other, Representation):
            return NotImplemented
        return (self.bunch == other.bunch and self.sizes == other.sizes
                and all(self.blocks[k] == other.blocks.get(k) for k in self.blocks))

    def __repr__(self):
        return f"Representation(sizes={ {k: v for k, v in self.sizes.items() if v} })"

    # -- serialisation ------------------------------------------------------
    def to_json(self, include_bunch: bool = True) -> dict:
        out = {}
        if include_bunch:
            out["bunch"] = self.bunch.to_json()
        out["sizes"] = {x: self.sizes[x] for x in self.bunch.elements}
        out["matrices"] = {f"{x}|{y}": m.to_json() for (x, y), m in self.blocks.items()
                           if m.nrows and m.ncols}
        return out

    @classmethod
    def from_json(cls, data, field: FunctionField, bunch: DecoratedBunch | None = None) -> "Representation":
        if isinstance(data, str):
            data = json.loads(data)
        if bunch is None:
            b = data.get("bunch")
            if b is None:
                raise ValueError("representation JSON has no bunch")
            bunch = DecoratedBunch.from_json(b)
        sizes = {x: int(v) for x, v in data.get("sizes", {}).items()}
        blocks = {}
        for key, rows in data.get("matrices", {}).items():
            if "|" not in key:
                raise ValueError(f"matrix key {key!r} must look like 'e|f'")
            x, y = key.split("|", 1)
            blocks[(x, y)] = Matrix.of(field, rows, ncols=sizes.get(y, 0) if not rows else None)
        return cls(bunch, field, sizes, blocks)


def validate_rep(M: Representation) -> list[Violation]:
    b = M.bunch
    v: list[Violation] = []
    legal = set(b.dash_pairs_EF())
    for x, m in M.sizes.items():
        if x not in b.side:
            v.append(Violation("UnknownElement", (x,)))
        elif m < 0:
            v.append(Violation("NegativeSize", (x,)))
    for c in b.sim_classes:
        if len(c) == 2 and M.size(c[0]) != M.size(c[1]):
            v.append(Violation("SizeMismatch", tuple(c), f"m_{c[0]}={M.size(c[0])} but m_{c[1]}={M.size(c[1])}"))
    for (x, y), m in M.blocks.items():
        if (x, y) not in legal:
            v.append(Violation("IllegalBlock", (x, y), "block present for a pair outside X(2)"))
            continue
        if m.shape != (M.size(x), M.size(y)):
            v.append(Violation("ShapeMismatch", (x, y), f"expected {M.size(x)}x{M.size(y)}, got {m.nrows}x{m.ncols}"))
    return v


def direct_sum(M: Representation, N: Representation) -> Representation:
    if M.bunch != N.bunch:
        raise BunchMismatch("direct sum of representations of different bunches")
    sizes = {x: M.size(x) + N.size(x) for x in M.bunch.elements}
    blocks = {k: block_diag(M.field, M.blocks[k], N.blocks[k]) for k in M.blocks}
    return Representation(M.bunch, M.field, sizes, blocks)


def direct_sum_all(bunch: DecoratedBunch, field: FunctionField, reps) -> Representation:
    out = Representation(bunch, field, {})
    for r in reps:
        out = direct_sum(out, r)
    return out


# ---------------------------------------------------------------------------
# morphisms


@dataclass
class MorphismData:
    diagonal: dict = field(default_factory=dict)
    offdiagonal: dict = field(default_factory=dict)


def offdiag_ring(b: DecoratedBunch, x, y) -> str | None:
    """Ring of an off-diagonal morphism block S_xy: 'K', 'D', 'zD' or None."""
    if x == y or b.side[x] != b.side[y]:
        return None
    if b.less(x, y):
        return "D" if b.tri_less(x, y) else "K"
    if b.tri_less(y, x):
        return "zD"
    return None


def morphism_violations(S: MorphismData, b: DecoratedBunch) -> list[Violation]:
    v = []
    for x, s in S.diagonal.items():
        if b.is_decorated(x) and s.valuation() < 0:
            v.append(Violation("NotOverD", (x,), "S_x of a decorated element must have entries in D"))
    for c in b.sim_classes:
        if len(c) != 2 or c[0] not in S.diagonal or c[1] not in S.diagonal:
            continue
        a, bb = S.diagonal[c[0]], S.diagonal[c[1]]
        if b.is_decorated(c[0]):
            if (a - bb).valuation() < 1:
                v.append(Violation("E2", tuple(c), "residues of S on a decorated ~-pair differ"))
        elif a != bb:
            v.append(Violation("E1", tuple(c), "S differs on a non-decorated ~-pair"))
    for (x, y), s in S.offdiagonal.items():
        ring = offdiag_ring(b, x, y)
        if s.is_zero():
            continue
        if ring is None:
            v.append(Violation("IllegalOffDiagonal", (x, y)))
        elif ring == "D" and s.valuation() < 0:
            v.append(Violation("NotOverD", (x, y)))
        elif ring == "zD" and s.valuation() < 1:
            v.append(Violation("NotOverZD", (x, y)))
    return v


def is_morphism(S: MorphismData, M: Representation, N: Representation) -> bool:
    """Check constraints and the morphism equation on every dash pair."""
    b = M.bunch
    if morphism_violations(S, b):
        return False
    fld = M.field
    for x in b.elements:
        s = S.diagonal.get(x)
        if s is None:
            if M.size(x) != N.size(x):
                raise ShapeMismatch(f"missing S_{x} between different sizes")
            continue
        if s.shape != (N.size(x), M.size(x)):
            raise ShapeMismatch(f"S_{x} has shape {s.shape}")

    def diag(x):
        s = S.diagonal.get(x)
        return s if s is not None else Matrix.identity(fld, M.size(x))

    for x, y in b.dash_pairs_EF():
        lhs = diag(x) @ M.block(x, y)
        for (a, c), s in S.offdiagonal.items():
            if a == x and b.side[a] == "E" and b.dash(c, y):
                lhs = lhs + s @ M.block(c, y)
        rhs = N.block(x, y) @ diag(y)
        for (a, c), s in S.offdiagonal.items():
            if c == y and b.side[c] == "F" and b.dash(x, a):
                rhs = rhs + N.block(x, a) @ s
        if lhs != rhs:
            return False
    return True


def is_isomorphism_data(S: MorphismData, b: DecoratedBunch) -> bool:
    """Diagonal blocks invertible in the right ring (the morphism is then
    invertible modulo the radical)."""
    for x, s in S.diagonal.items():
        if b.is_decorated(x):
            if not is_D_invertible(s):
                return False
        else:
            try:
                inverse(s)
            except NotInvertible:
                return False
    return True


def compose(b: DecoratedBunch, M: Representation, second: MorphismData, first: MorphismData) -> MorphismData:
    """second o first.

    On each side the blocks form one big matrix indexed (row, column), with
    S_x on the diagonal, so composition is a plain product per side.
    """
    fld = M.field
    out = MorphismData()
    for elems in (b.E, b.F):
        def blk(S, x, y):
            if x == y:
                d = S.diagonal.get(x)
                return d if d is not None else Matrix.identity(fld, M.size(x))
            o = S.offdiagonal.get((x, y))
            return o if o is not None else Matrix.zeros(fld, M.size(x), M.size(y))

        for x in elems:
            for y in elems:
                acc = Matrix.zeros(fld, M.size(x), M.size(y))
                for k in elems:
                    if (k != x and (x, k) not in second.offdiagonal) or (k != y and (k, y) not in first.offdiagonal):
                        continue
                    acc = acc + blk(second, x, k) @ blk(first, k, y)
                if x == y:
                    out.diagonal[x] = acc
                elif not acc.is_zero():
                    out.offdiagonal[(x, y)] = acc
    return out


# ---------------------------------------------------------------------------
# moves


@dataclass(frozen=True)
class Move:
    """One elementary transformation.

    ``T1``: ``data`` is a sorted tuple of (element, S_x) pairs.
    ``T2``: ``data`` is (target, source, C): for E-elements rows of source,
    times C on the left, are added to target; for F-elements columns of
    source, times C on the right, are added to target.  C is the effective
    coefficient (already multiplied by z when the rule requires it).
    ``EL``: (x, op, i, j, c, follow), the T1 move whose S_x is I + c*e_ij
    (op "add"), the identity with c at (i, i) (op "scale") or the
    transposition of i and j (op "swap"); with ``follow`` the ~-partner of x
    receives the same matrix.
    ``T2e``: (target, ti, source, si, c), the T2 move whose C has the single
    entry c linking index ti of target and index si of source.
    """

    kind: str
    data: tuple

    def to_json(self):
        if self.kind == "T1":
            return {"kind": "T1", "S": {x: s.to_json() for x, s in self.data}}
        if self.kind == "T2":
            t, s, c = self.data
            return {"kind": "T2", "target": t, "source": s, "C": c.to_json()}
        if self.kind == "EL":
            x, op, i, j, c, follow = self.data
            return {"kind": "EL", "element": x, "op": op, "i": i, "j": j, "c": str(c), "follow": follow}
        t, ti, s, si, c = self.data
        return {"kind": "T2e", "target": t, "ti": ti, "source": s, "si": si, "c": str(c)}


def elementary_matrix(field, n: int, op: str, i: int, j: int, c) -> Matrix:
    rows = [list(r) for r in Matrix.identity(field, n).rows]
    if op == "add":
        rows[i][j] = rows[i][j] + c
    elif op == "scale":
        rows[i][i] = c
    elif op == "swap":
        rows[i], rows[j] = rows[j], rows[i]
    else:
        raise ValueError(f"unknown elementary op {op!r}")
    return Matrix(field, rows, n, n)


def expand_move(b: DecoratedBunch, M: "Representation", mv: Move) -> Move:
    """Rewrite a compact EL / T2e move as a full T1 / T2 move."""
    fld = M.field
    if mv.kind == "EL":
        x, op, i, j, c, follow = mv.data
        s = elementary_matrix(fld, M.size(x), op, i, j, c)
        mats = {x: s}
        if follow and x in b.partner:
            mats[b.partner[x]] = s
        return t1_move(mats)
    if mv.kind == "T2e":
        t, ti, s, si, c = mv.data
        if b.side[t] == "E":
            rows = [[fld.zero] * M.size(s) for _ in range(M.size(t))]
            rows[ti][si] = c
            return t2_move(t, s, Matrix(fld, rows, M.size(t), M.size(s)))
        rows = [[fld.zero] * M.size(t) for _ in range(M.size(s))]
        rows[si][ti] = c
        return t2_move(t, s, Matrix(fld, rows, M.size(s), M.size(t)))
    return mv


def t1_move(mats: dict) -> Move:
    return Move("T1", tuple(sorted(mats.items())))


def t2_move(target, source, coeff: Matrix) -> Move:
    return Move("T2", (target, source, coeff))


def check_T1(b: DecoratedBunch, M: Representation, mats: dict):
    for x, s in mats.items():
        if s.shape != (M.size(x), M.size(x)):
            raise ShapeMismatch(f"S_{x} has shape {s.shape}, expected {M.size(x)}x{M.size(x)}")
        if b.is_decorated(x):
            if not is_D_invertible(s):
                raise NotInvertible(f"S_{x} is not invertible over D")
        else:
            inverse(s)
    for x, s in mats.items():
        y = b.partner.get(x)
        if y is None:
            continue
        t = mats.get(y)
        if b.is_decorated(x):
            other = t if t is not None else Matrix.identity(M.field, M.size(y))
            if (s - other).valuation() < 1:
                raise EConditionViolated(f"S_{x} and S_{y} must agree modulo z")
        else:
            if t is None or t != s:
                raise EConditionViolated(f"S_{x} and S_{y} must be equal")


def apply_T1(M: Representation, mats: dict, check: bool = True) -> Representation:
    """Replace every M_xy by S_x M_xy S_y^-1."""
    b = M.bunch
    if check:
        check_T1(b, M, mats)
    invs = {x: inverse(s) for x, s in mats.items() if b.side[x] == "F"}
    updates = {}
    for (x, y), blk in M.blocks.items():
        if x not in mats and y not in invs:
            continue
        nb = blk
        if x in mats:
            nb = mats[x] @ nb
        if y in invs:
            nb = nb @ invs[y]
        updates[(x, y)] = nb
    return M.with_blocks(updates)


def t2_ring(b: DecoratedBunch, target, source) -> str | None:
    """Ring of the effective coefficient moving stripe ``source`` into ``target``.

    E: rows flow from larger to smaller (or downward inside tri with zD).
    F: columns flow from smaller to larger (or downward inside tri with zD).
    """
    if target == source or b.side[target] != b.side[source]:
        return None
    if b.side[target] == "E":
        return offdiag_ring(b, target, source)
    return offdiag_ring(b, source, target)


def apply_move(M: Representation, mv: Move, check: bool = False) -> Representation:
    mv = expand_move(M.bunch, M, mv)
    if mv.kind == "T1":
        return apply_T1(M, dict(mv.data), check=check)
    target, source, c = mv.data
    b = M.bunch
    if check:
        ring = t2_ring(b, target, source)
        if ring is None:
            raise IllegalPair(f"no transformation from {source} to {target}")
        need = {"K": None, "D": 0, "zD": 1}[ring]
        if need is not None and c.valuation() < need:
            raise IllegalPair(f"coefficient not in {ring}")
    updates = {}
    if b.side[target] == "E":
        for y in b.adj[target]:
            if (source, y) in M.blocks:
                updates[(target, y)] = M.blocks[(target, y)] + c @ M.blocks[(source, y)]
    else:
        for x in b.adj[target]:
            if (x, source) in M.blocks:
                updates[(x, target)] = M.blocks[(x, target)] + M.blocks[(x, source)] @ c
    return M.with_blocks(updates)


def apply_T2(M: Representation, x, y, S: Matrix) -> Representation:
    """The transformation between stripes x and y.

    Rule (a), x < y: S over K (x prec y) or D (x tri y).  Rule (b), y tri x:
    S over D and the update is multiplied by z.  For E-elements M_xw gains
    S M_yw; for F-elements M_wy gains M_wx S.
    """
    b = M.bunch
    if x == y or b.side[x] != b.side[y]:
        raise IllegalPair(f"{x}, {y} are not a legal pair")
    if b.less(x, y):
        if b.tri_less(x, y) and S.valuation() < 0:
            raise IllegalPair("rule (a) inside tri needs S over D")
        eff = S
    elif b.tri_less(y, x):
        if S.valuation() < 0:
            raise IllegalPair("rule (b) needs S over D")
        eff = S.shift(1)
    else:
        raise IllegalPair(f"{x}, {y} are not comparable in the required way")
    if b.side[x] == "E":
        return apply_move(M, t2_move(x, y, eff))
    return apply_move(M, t2_move(y, x, eff))


def move_morphism(b: DecoratedBunch, M: Representation, mv: Move) -> MorphismData:
    """The isomorphism M -> apply_move(M, mv)."""
    mv = expand_move(b, M, mv)
    if mv.kind == "T1":
        return MorphismData(dict(mv.data), {})
    target, source, c = mv.data
    if b.side[target] == "E":
        return MorphismData({}, {(target, source): c})
    return MorphismData({}, {(source, target): -c})


def replay(M: Representation, log) -> Representation:
    for mv in log:
        M = apply_move(M, mv)
    return M


def compose_log(M: Representation, log) -> MorphismData:
    """Single morphism from M to replay(M, log)."""
    b = M.bunch
    total = MorphismData()
    for mv in log:
        total = compose(b, M, move_morphism(b, M, mv), total)
    return total


# ---------------------------------------------------------------------------
# random moves


def _rand_scalar(rng: random.Random, field: FunctionField, ring: str):
    c = rng.choice([1, -1, 2, -2, 3])
    if ring == "K":
        e = rng.choice([-1, 0, 0, 1])
    elif ring == "D":
        e = rng.choice([0, 0, 1])
    else:
        e = rng.choice([1, 1, 2])
    return field.monomial(c, e)


def _rand_coeff(rng: random.Random, field: FunctionField, nrows: int, ncols: int, ring: str) -> Matrix:
    rows = [[field.zero] * ncols for _ in range(nrows)]
    for _ in range(rng.choice([1, 1, 2])):
        rows[rng.randrange(nrows)][rng.randrange(ncols)] = _rand_scalar(rng, field, ring)
    return Matrix(field, rows, nrows, ncols)


def _rand_invertible(rng: random.Random, field: FunctionField, n: int, decorated: bool) -> Matrix:
    s = [list(r) for r in Matrix.identity(field, n).rows]
    kind = rng.random()
    if n > 1 and kind < 0.6:
        i, j = rng.sample(range(n), 2)
        s[i][j] = _rand_scalar(rng, field, "D" if decorated else "K")
    elif n > 1 and kind < 0.75:
        i, j = rng.sample(range(n), 2)
        s[i], s[j] = s[j], s[i]
    else:
        i = rng.randrange(n)
        if decorated:
            s[i][i] = field(rng.choice([2, 3, -1])) + (field.z if rng.random() < 0.5 else field.zero)
        else:
            s[i][i] = field.monomial(rng.choice([1, 2, -1]), rng.choice([-1, 1, 0]))
    return Matrix(field, s, n, n)


def random_move(M: Representation, rng: random.Random) -> Move | None:
    b = M.bunch
    fld = M.field
    live = [x for x in b.elements if M.size(x) > 0]
    if not live:
        return None
    pairs = [(t, s) for t in live for s in live if t2_ring(b, t, s) is not None]
    if pairs and rng.random() < 0.5:
        t, s = rng.choice(pairs)
        ring = t2_ring(b, t, s)
        if b.side[t] == "E":
            c = _rand_coeff(rng, fld, M.size(t), M.size(s), ring)
        else:
            c = _rand_coeff(rng, fld, M.size(s), M.size(t), ring)
        return t2_move(t, s, c)
    x = rng.choice(live)
    dec = b.is_decorated(x)
    s = _rand_invertible(rng, fld, M.size(x), dec)
    mats = {x: s}
    y = b.partner.get(x)
    if y is not None:
        if dec and rng.random() < 0.5:
            n = M.size(y)
            i, j = rng.randrange(n), rng.randrange(n)
            bump = [[fld.zero] * n for _ in range(n)]
            bump[i][j] = field_z_multiple(rng, fld)
            mats[y] = s + Matrix(fld, bump, n, n)
            if not is_D_invertible(mats[y]):
                mats[y] = s
        else:
            mats[y] = s
    return t1_move(mats)


def field_z_multiple(rng: random.Random, fld: FunctionField):
    return fld.monomial(rng.choice([1, -1, 2]), rng.choice([1, 2]))


def random_conjugate(M: Representation, seed: int, steps: int) -> tuple[Representation, list[Move]]:
    """Apply ``steps`` random legal moves; returns the result and the move log."""
    rng = random.Random(seed)
    log = []
    for _ in range(steps):
        mv = random_move(M, rng)
        if mv is None:
            break
        M = apply_move(M, mv)
        log.append(mv)
    return M, log
