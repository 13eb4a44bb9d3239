"""Reduction of representations to strings and bands.

Each step picks a leading pair (x0, y0), normalizes the block M_{x0 y0}
with admissible moves, clears the matched rows and columns everywhere else,
and crosses them out.  What is left is a representation of a derived bunch;
the crossed-out part is either split off as explicit strings and bands or
recorded in the derived bunch through new elements, together with a word
rewrite that translates canonical words of the derived bunch back.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field as dc_field

from .bunch import DecoratedBunch
from .canon import BandData, StringData
from .linalg import (
    Matrix, elementary_divisors, elementary_divisors_ranks, fitting_basis, fitting_split,
    inverse, is_D_invertible, nilpotent_jordan_basis, tpoly_reverse_monic,
)
from .reps import Move, Representation, t1_move, t2_move, t2_ring
from .scalars import INF
from .words import SIM, Cycle, Word, _groups, canonicalize, cycle_matches, oriented, string_key


class ZeroRepresentation(ValueError):
    pass


class NoProgress(RuntimeError):
    pass


@dataclass(frozen=True)
class LeadingPair:
    x0: str
    y0: str
    d: object
    X0: tuple
    Y0: tuple


# ---------------------------------------------------------------------------
# mutable work state


class _Work:
    """Dense mutable blocks plus a log of the moves applied to them."""

    def __init__(self, bunch: DecoratedBunch, field, sizes: dict, blocks: dict):
        self.b = bunch
        self.field = field
        self.sizes = sizes
        self.M = blocks
        self.log: list[Move] = []

    @classmethod
    def of(cls, rep: Representation) -> "_Work":
        b = rep.bunch
        blocks = {k: [list(r) for r in rep.block(*k).rows] for k in b.dash_pairs_EF()}
        return cls(b, rep.field, {x: rep.size(x) for x in b.elements}, blocks)

    def size(self, x) -> int:
        return self.sizes.get(x, 0)

    def rep(self) -> Representation:
        blocks = {k: Matrix(self.field, v, self.size(k[0]), self.size(k[1])) for k, v in self.M.items()}
        return Representation(self.b, self.field, dict(self.sizes), blocks)

    def dual(self) -> "_Work":
        blocks = {(y, x): [list(c) for c in zip(*v)] if v else [[] for _ in range(self.size(y))]
                  for (x, y), v in self.M.items()}
        return _Work(self.b.dual(), self.field, dict(self.sizes), blocks)

    def nonzero(self, key) -> bool:
        return any(not a.is_zero() for r in self.M[key] for a in r)

    def _blocks_of(self, x):
        """(key, block) for the blocks touching x."""
        b = self.b
        if b.side[x] == "E":
            return [((x, y), self.M[(x, y)]) for y in b.adj[x]]
        return [((w, x), self.M[(w, x)]) for w in b.adj[x]]

    # -- elementary T1 moves ------------------------------------------------
    def _el_raw(self, x, op, i, j, c):
        if self.b.side[x] == "E":
            for _, blk in self._blocks_of(x):
                if op == "add":
                    blk[i] = [a if bb.is_zero() else a + c * bb for a, bb in zip(blk[i], blk[j])]
                elif op == "scale":
                    blk[i] = [c * a for a in blk[i]]
                else:
                    blk[i], blk[j] = blk[j], blk[i]
        else:
            ci = 1 / c if op == "scale" else None
            for _, blk in self._blocks_of(x):
                for row in blk:
                    if op == "add":
                        if not row[i].is_zero():
                            row[j] = row[j] - c * row[i]
                    elif op == "scale":
                        row[i] = ci * row[i]
                    else:
                        row[i], row[j] = row[j], row[i]

    def el(self, x, op, i, j, c, follow=True):
        b = self.b
        partner = b.partner.get(x)
        if b.is_decorated(x):
            if op == "add" and c.valuation() < 0:
                raise NoProgress(f"coefficient outside D on {x}")
            if op == "scale" and c.valuation() != 0:
                raise NoProgress(f"scaling {x} by a non-unit")
            if partner is not None and not follow:
                if op == "swap" or (op == "add" and c.valuation() < 1) or (op == "scale" and (c - 1).valuation() < 1):
                    raise NoProgress(f"move on {x} is not trivial modulo z")
        elif partner is not None and not follow:
            raise NoProgress(f"{x} must move together with {partner}")
        self._el_raw(x, op, i, j, c)
        if follow and partner is not None:
            self._el_raw(partner, op, i, j, c)
        self.log.append(Move("EL", (x, op, i, j, c, follow)))

    def row_add(self, x, dst, src, c, follow=True):
        """Row dst of E-element x gains c times row src."""
        if not c.is_zero():
            self.el(x, "add", dst, src, c, follow)

    def col_add(self, y, dst, src, c, follow=True):
        """Column dst of F-element y gains c times column src."""
        if not c.is_zero():
            self.el(y, "add", src, dst, -c, follow)

    def row_scale(self, x, i, a, follow=True):
        if not a.is_one():
            self.el(x, "scale", i, i, a, follow)

    def col_scale(self, y, i, a, follow=True):
        if not a.is_one():
            self.el(y, "scale", i, i, 1 / a, follow)

    # -- T2 moves -----------------------------------------------------------
    def _check_t2(self, target, source, val):
        ring = t2_ring(self.b, target, source)
        if ring is None:
            raise NoProgress(f"no transformation from {source} into {target}")
        if (ring == "D" and val < 0) or (ring == "zD" and val < 1):
            raise NoProgress(f"coefficient from {source} into {target} is not in {ring}")

    def t2e(self, target, ti, source, si, c):
        """Line ti of target gains c times line si of source (rows for E,
        columns for F)."""
        if c.is_zero():
            return
        self._check_t2(target, source, c.valuation())
        b = self.b
        if b.side[target] == "E":
            for y in b.adj[target]:
                if (source, y) in self.M:
                    dst, src = self.M[(target, y)][ti], self.M[(source, y)][si]
                    self.M[(target, y)][ti] = [a if bb.is_zero() else a + c * bb for a, bb in zip(dst, src)]
        else:
            for x in b.adj[target]:
                if (x, source) in self.M:
                    for rt, rs in zip(self.M[(x, target)], self.M[(x, source)]):
                        if not rs[si].is_zero():
                            rt[ti] = rt[ti] + c * rs[si]
        self.log.append(Move("T2e", (target, ti, source, si, c)))

    def t2(self, target, source, C: Matrix):
        """Full T2 move with effective coefficient C."""
        if C.is_zero():
            return
        self._check_t2(target, source, C.valuation())
        b = self.b
        fld = self.field
        if b.side[target] == "E":
            for y in b.adj[target]:
                if (source, y) in self.M:
                    add = C @ Matrix(fld, self.M[(source, y)], self.size(source), self.size(y))
                    self.M[(target, y)] = [[a + c for a, c in zip(r1, r2)] for r1, r2 in zip(self.M[(target, y)], add.rows)]
        else:
            for x in b.adj[target]:
                if (x, source) in self.M:
                    add = Matrix(fld, self.M[(x, source)], self.size(x), self.size(source)) @ C
                    self.M[(x, target)] = [[a + c for a, c in zip(r1, r2)] for r1, r2 in zip(self.M[(x, target)], add.rows)]
        self.log.append(t2_move(target, source, C))

    def t1(self, mats: dict):
        """Full T1 move; mats maps elements to S_x."""
        b = self.b
        for x, s in mats.items():
            if b.is_decorated(x) and not is_D_invertible(s):
                raise NoProgress(f"S_{x} is not invertible over D")
            p = b.partner.get(x)
            if p is not None:
                other = mats.get(p, Matrix.identity(self.field, self.size(p)))
                if b.is_decorated(x):
                    if (s - other).valuation() < 1:
                        raise NoProgress(f"S_{x}, S_{p} differ modulo z")
                elif s != other:
                    raise NoProgress(f"S_{x}, S_{p} differ")
        fld = self.field
        for x, s in mats.items():
            sinv = inverse(s) if b.side[x] == "F" else None
            for key, blk in self._blocks_of(x):
                m = Matrix(fld, blk, self.size(key[0]), self.size(key[1]))
                m = s @ m if sinv is None else m @ sinv
                self.M[key] = [list(r) for r in m.rows]
        self.log.append(t1_move(mats))


def _dual_log(log) -> list[Move]:
    """Moves recorded on the dual work state, in original terms."""
    out = []
    for mv in log:
        if mv.kind == "EL":
            x, op, i, j, c, follow = mv.data
            if op == "add":
                out.append(Move("EL", (x, "add", j, i, -c, follow)))
            elif op == "scale":
                out.append(Move("EL", (x, "scale", i, i, 1 / c, follow)))
            else:
                out.append(mv)
        elif mv.kind == "T2e":
            out.append(mv)
        elif mv.kind == "T2":
            t, s, c = mv.data
            out.append(t2_move(t, s, c.transpose()))
        else:
            out.append(t1_move({x: inverse(s).transpose() for x, s in mv.data}))
    return out


# ---------------------------------------------------------------------------
# leading pair


def _chain_intervals(b: DecoratedBunch, chain) -> list[tuple]:
    out, cur = [], []
    for y in chain:
        if cur and all(b.tri_less(w, y) for w in cur):
            cur.append(y)
        else:
            if cur:
                out.append(tuple(cur))
            cur = [y]
    if cur:
        out.append(tuple(cur))
    return out


def _block_val(w: _Work, x, y):
    return min((a.valuation() for r in w.M[(x, y)] for a in r), default=INF)


def _leading(w: _Work) -> LeadingPair:
    b = w.b
    nz = [k for k in w.M if w.nonzero(k)]
    if not nz:
        raise ZeroRepresentation("all blocks are zero")
    classes = {b.theta[x] for x, _ in nz}
    cls = next(b.theta[x] for x in b.elements if b.theta[x] in classes)
    nz = {k for k in nz if b.theta[k[0]] == cls}
    ex = next(iter(nz))
    e_ints = _chain_intervals(b, b.chain(ex[0]))
    f_ints = _chain_intervals(b, b.chain(ex[1]))
    X0 = next(X for X in reversed(e_ints) if any(k[0] in X for k in nz))
    Y0 = next(Y for Y in f_ints if any(k[0] in X0 and k[1] in Y for k in nz))
    vals = {(x, y): _block_val(w, x, y) for x in X0 for y in Y0 if (x, y) in w.M}
    d = min(vals.values())
    x0 = next(x for x in reversed(X0) if any(vals.get((x, y), INF) == d for y in Y0))
    y0 = next(y for y in Y0 if vals.get((x0, y), INF) == d)
    return LeadingPair(x0, y0, d, X0, Y0)


def leading_pair(rep: Representation) -> LeadingPair:
    return _leading(_Work.of(rep))


# ---------------------------------------------------------------------------
# derived bunches and word rewrites


@dataclass
class _NewElement:
    name: str
    side: str
    template: str
    decorated: bool


def _derive(b: DecoratedBunch, removed: set, new: list, sims: list, explicit: list) -> DecoratedBunch:
    """Derived bunch: kept elements keep their relations; a new element
    copies dashes and order relations of its template, except for pairs
    listed in ``explicit`` as (u, v, kind) meaning u < v with kind "prec" or
    "tri"."""
    tmpl = {x: x for x in b.elements if x not in removed}
    deco = {x: b.is_decorated(x) for x in tmpl}
    after: dict = {}
    for ne in new:
        tmpl[ne.name] = ne.template
        deco[ne.name] = ne.decorated
        after.setdefault(ne.template, []).append(ne)
    E, F = [], []
    for x in b.elements:
        group = [x] if x not in removed else []
        for ne in after.get(x, ()):
            group.append(ne.name)
        for y in group:
            (E if (y in b.side and b.side[y] == "E") or (y not in b.side and _side_of(new, y) == "E") else F).append(y)
    names = E + F
    fixed = {}
    for u, v, kind in explicit:
        fixed[(u, v)] = kind
        fixed[(v, u)] = "rev"
    sim = [p for p in b.sim_pairs if p[0] in tmpl and p[1] in tmpl and p[0] not in removed and p[1] not in removed]
    sim += [tuple(p) for p in sims]
    dash, le, tri = [], [], []
    for i, u in enumerate(names):
        if deco[u]:
            tri.append((u, u))
        for v in names[i + 1:]:
            tu, tv = tmpl[u], tmpl[v]
            if b.dash(tu, tv):
                dash.append((u, v))
            kind = fixed.get((u, v))
            if kind is not None:
                if kind == "rev":
                    kind, (u2, v2) = fixed[(v, u)], (v, u)
                else:
                    u2, v2 = u, v
                le.append((u2, v2))
                if kind == "tri":
                    tri.append((u2, v2))
                continue
            if tu == tv:
                raise NoProgress(f"no order given between {u} and {v}")
            for a, bb, ta, tb in ((u, v, tu, tv), (v, u, tv, tu)):
                if b.less(ta, tb):
                    le.append((a, bb))
                    if b.tri_less(ta, tb):
                        tri.append((a, bb))
    nb = DecoratedBunch(E, F, sim, dash, le, tri)
    # order relations only matter inside one theta class and side
    le2 = [(u, v) for u, v in le if nb.theta[u] == nb.theta[v] and nb.side[u] == nb.side[v]]
    tri2 = [(u, v) for u, v in tri if u == v or (nb.theta[u] == nb.theta[v] and nb.side[u] == nb.side[v])]
    if len(le2) != len(le) or len(tri2) != len(tri):
        nb = DecoratedBunch(E, F, sim, dash, le2, tri2)
    bad = nb.validate()
    if bad:
        raise NoProgress("derived bunch breaks the axioms: " + "; ".join(str(v) for v in bad))
    return nb


def _side_of(new, name):
    return next(ne.side for ne in new if ne.name == name)


@dataclass
class _Rewrite:
    """Translation of words over a derived bunch to the bunch before it.

    ``pairs[(u, v)]`` replaces the group "u ~ v"; ``lone[u]`` replaces a lone
    letter u standing at the right end of a word.  Fragments are given as
    (letters, conns).
    """

    pairs: dict = dc_field(default_factory=dict)
    lone: dict = dc_field(default_factory=dict)

    def _group(self, u, v):
        if v is None:
            return self.lone.get(u)
        if (u, v) in self.pairs:
            return self.pairs[(u, v)]
        if (v, u) in self.pairs:
            return _reverse(self.pairs[(v, u)])
        return None

    def apply(self, w):
        cyclic = isinstance(w, Cycle)
        letters = w.letters
        conns = w.word.conns if cyclic else w.conns
        all_conns = w.cyclic_conns() if cyclic else conns
        groups = _groups(letters, conns, cyclic)
        out_l: list = []
        out_c: list = []
        for gi, (s, e) in enumerate(groups):
            u = letters[s]
            v = letters[e] if e != s else None
            frag = self._group(u, v)
            if frag is not None and v is None and gi == 0 and len(groups) > 1:
                frag = _reverse(frag)
            if frag is None:
                frag = ((u,), ()) if v is None else ((u, v), (SIM,))
            if gi > 0:
                out_c.append(all_conns[s - 1])
            out_l.extend(frag[0])
            out_c.extend(frag[1])
        word = Word(tuple(out_l), tuple(out_c))
        return Cycle(word, w.d) if cyclic else word


def _reverse(frag):
    return tuple(reversed(frag[0])), tuple(reversed(frag[1]))


# ---------------------------------------------------------------------------
# crossing out


def _crossout(w: _Work, nb: DecoratedBunch, index: dict) -> Representation:
    """Representation of the derived bunch; index[x'] = (old element, old
    indices) for every element of nb."""
    fld = w.field
    zero = fld.zero
    sizes = {x: len(index[x][1]) for x in nb.elements}
    blocks = {}
    for xn, yn in nb.dash_pairs_EF():
        xo, ri = index[xn]
        yo, ci = index[yn]
        src = w.M.get((xo, yo))
        if src is None:
            rows = [[zero] * len(ci) for _ in ri]
        else:
            rows = [[src[r][c] for c in ci] for r in ri]
        blocks[(xn, yn)] = Matrix(fld, rows, len(ri), len(ci))
    return Representation(nb, fld, sizes, blocks)


def _keep_index(w: _Work, skip: set) -> dict:
    return {x: (x, list(range(w.size(x)))) for x in w.b.elements if x not in skip}


@dataclass
class StepResult:
    case: int
    pair: LeadingPair
    bunch: DecoratedBunch
    rep: Representation
    specials: list
    log: list
    rewrite: _Rewrite
    before: Representation


# ---------------------------------------------------------------------------
# Cases 1 and 4: x0, y0 not partners, equal decoration


def _smith(w: _Work, x0, y0, d, decorated: bool):
    """Reduce M_{x0 y0} to unit pivots z^d (decorated) or 1; returns the
    pivot (row, column) list.  Remaining entries have valuation > d in the
    decorated case and vanish otherwise."""
    fld = w.field
    blk = w.M[(x0, y0)]
    m, n = w.size(x0), w.size(y0)
    zd = fld.monomial(1, d) if decorated else fld.one
    rows, cols = set(range(m)), set(range(n))
    pivots = []
    while True:
        cand = None
        for i in sorted(rows):
            for j in sorted(cols):
                a = blk[i][j]
                if not a.is_zero() and (not decorated or a.valuation() == d):
                    cand = (i, j)
                    break
            if cand:
                break
        if cand is None:
            return pivots
        i, j = cand
        w.row_scale(x0, i, zd / blk[i][j])
        for c in range(n):
            if c != j:
                w.col_add(y0, c, j, -blk[i][c] / zd)
        for r in range(m):
            if r != i:
                w.row_add(x0, r, i, -blk[r][j] / zd)
        rows.discard(i)
        cols.discard(j)
        pivots.append((i, j))


def _clear_units(w: _Work, x0, y0, units, zd, skip_rows=(), skip_cols=()):
    """Clear row i of x0 outside y0 and column j of y0 outside x0 for each
    unit (i, j) whose entry is exactly zd."""
    b = w.b
    for i, j in units:
        for y in b.adj[x0]:
            if y == y0 or y in skip_cols:
                continue
            row = w.M[(x0, y)][i]
            for c in range(w.size(y)):
                if not row[c].is_zero():
                    w.t2e(y, c, y0, j, -row[c] / zd)
    for i, j in units:
        for x in b.adj[y0]:
            if x == x0 or x in skip_rows:
                continue
            blk = w.M[(x, y0)]
            for r in range(w.size(x)):
                if not blk[r][j].is_zero():
                    w.t2e(x, r, x0, i, -blk[r][j] / zd)


def _case_14(w: _Work, lp: LeadingPair, step: int, decorated: bool):
    b = w.b
    x0, y0 = lp.x0, lp.y0
    d = lp.d if decorated else 0
    zd = w.field.monomial(1, d)
    units = _smith(w, x0, y0, d, decorated)
    _clear_units(w, x0, y0, units, zd)
    before = w.rep()
    P = [i for i, _ in units]
    C = [j for _, j in units]
    z, z2 = b.partner.get(x0), b.partner.get(y0)
    index = _keep_index(w, set())
    index[x0] = (x0, [i for i in range(w.size(x0)) if i not in P])
    index[y0] = (y0, [j for j in range(w.size(y0)) if j not in C])
    new, sims, explicit = [], [], []
    specials = []
    rw = _Rewrite()
    kind = "tri" if decorated else "prec"
    zs = z2s = None
    if z is not None:
        zs = f"{z}*s{step}"
        index[z] = (z, [i for i in range(w.size(z)) if i not in P])
        index[zs] = (z, P)
        new.append(_NewElement(zs, b.side[z], z, b.is_decorated(z)))
        explicit.append((zs, z, kind))
    if z2 is not None:
        z2s = f"{z2}*s{step}"
        index[z2] = (z2, [j for j in range(w.size(z2)) if j not in C])
        index[z2s] = (z2, C)
        new.append(_NewElement(z2s, b.side[z2], z2, b.is_decorated(z2)))
        explicit.append((z2, z2s, kind))
    if zs and z2s:
        sims.append((zs, z2s))
        rw.pairs[(zs, z2s)] = ((z, x0, y0, z2), (SIM, d, SIM))
    elif zs:
        rw.lone[zs] = ((z, x0, y0), (SIM, d))
    elif z2s:
        rw.lone[z2s] = ((z2, y0, x0), (SIM, d))
    else:
        specials = [StringData(Word((x0, y0), (d,)))] * len(units)
    nb = _derive(b, set(), new, sims, explicit)
    return nb, _crossout(w, nb, index), specials, rw, before


# ---------------------------------------------------------------------------
# Cases 2 and 5: x0 ~ y0


def _case_25(w: _Work, lp: LeadingPair, step: int, decorated: bool):
    b = w.b
    fld = w.field
    x0, y0 = lp.x0, lp.y0
    n = w.size(x0)
    d = lp.d if decorated else 0
    zd = fld.monomial(1, d)
    A = Matrix(fld, w.M[(x0, y0)], n, n)
    if decorated:
        S1, S2, r = fitting_split(A.shift(-d))
        w.t1({x0: S1, y0: inverse(S2)})
    else:
        P, r = fitting_basis(A)
        Pinv = inverse(P)
        w.t1({x0: Pinv, y0: Pinv})
    k = n - r
    A = Matrix(fld, w.M[(x0, y0)], n, n)
    inv_idx = list(range(k, n))
    specials = []
    if r:
        A1 = A.submatrix(inv_idx, inv_idx)
        if decorated:
            divs = elementary_divisors(A1.shift(-d).residue())
        else:
            divs = elementary_divisors_ranks(A1)
        cyc = Cycle(Word((x0, y0), (SIM,)), d)
        specials = [BandData(cyc, e, tuple(phi)) for phi, e in divs]
        # clear the invertible part elsewhere
        A1inv = inverse(A1)
        for y in b.adj[x0]:
            if y == y0:
                continue
            rows = w.M[(x0, y)]
            if all(a.is_zero() for i in inv_idx for a in rows[i]):
                continue
            part = Matrix(fld, [rows[i] for i in inv_idx], r, w.size(y))
            coeff = -(A1inv @ part)
            full = [[fld.zero] * w.size(y) for _ in range(n)]
            for a, i in enumerate(inv_idx):
                full[i] = list(coeff.rows[a])
            w.t2(y, y0, Matrix(fld, full, n, w.size(y)))
        for x in b.adj[y0]:
            if x == x0:
                continue
            blk = w.M[(x, y0)]
            if all(blk[a][j].is_zero() for a in range(w.size(x)) for j in inv_idx):
                continue
            part = Matrix(fld, [[row[j] for j in inv_idx] for row in blk], w.size(x), r)
            coeff = -(part @ A1inv)
            full = [[fld.zero] * n for _ in range(w.size(x))]
            for a in range(w.size(x)):
                for c, j in enumerate(inv_idx):
                    full[a][j] = coeff.rows[a][c]
            w.t2(x, x0, Matrix(fld, full, w.size(x), n))
    sizes: list[int] = []
    units = []
    if k:
        A0 = A.submatrix(range(k), range(k))
        N = A0.shift(-d).residue() if decorated else A0
        P, sizes = nilpotent_jordan_basis(N)
        if decorated:
            P = P.lift(fld)
        Pinv = inverse(P)
        full = [[fld.one if i == j else fld.zero for j in range(n)] for i in range(n)]
        for i in range(k):
            for j in range(k):
                full[i][j] = Pinv.rows[i][j]
        S = Matrix(fld, full, n, n)
        w.t1({x0: S, y0: S})
        off = 0
        for s in sizes:
            units.extend((off + l, off + l + 1) for l in range(s - 1))
            off += s
        if decorated:
            blk = w.M[(x0, y0)]
            for i, j in units:
                w.row_scale(x0, i, zd / blk[i][j], follow=False)
                for c in range(k):
                    if c != j:
                        w.col_add(y0, c, j, -blk[i][c] / zd, follow=False)
                for rr in range(k):
                    if rr != i:
                        w.row_add(x0, rr, i, -blk[rr][j] / zd, follow=False)
        _clear_units(w, x0, y0, units, zd)
    before = w.rep()
    # chains of equal size become the new elements e_s, f_s
    by_size: dict = {}
    off = 0
    for s in sizes:
        by_size.setdefault(s, []).append(off)
        off += s
    index = _keep_index(w, {x0, y0})
    new, sims, explicit = [], [], []
    rw = _Rewrite()
    kind = "tri" if decorated else "prec"
    names = {}
    for s in sorted(by_size):
        e, f = f"e{s}s{step}", f"f{s}s{step}"
        names[s] = (e, f)
        index[e] = (x0, [o + s - 1 for o in by_size[s]])
        index[f] = (y0, list(by_size[s]))
        new.append(_NewElement(e, b.side[x0], x0, decorated))
        new.append(_NewElement(f, b.side[y0], y0, decorated))
        sims.append((e, f))
        letters = (y0, x0) * s
        conns = tuple(SIM if t % 2 == 0 else d for t in range(2 * s - 1))
        rw.pairs[(f, e)] = (letters, conns)
    ks = sorted(by_size)
    for a, s in enumerate(ks):
        for t in ks[a + 1:]:
            explicit.append((names[s][0], names[t][0], kind))
            explicit.append((names[t][1], names[s][1], kind))
    nb = _derive(b, {x0, y0}, new, sims, explicit)
    return nb, _crossout(w, nb, index), specials, rw, before


# ---------------------------------------------------------------------------
# Case 3: x0 non-decorated, y0 decorated


def _case_3(w: _Work, lp: LeadingPair, step: int):
    b = w.b
    fld = w.field
    x0 = lp.x0
    Y0 = lp.Y0
    for y in Y0:
        p = b.partner.get(y)
        if p is not None and p in Y0:
            raise NoProgress(f"partners {y}, {p} inside one decorated interval")
    m = w.size(x0)
    cols = [(t, c) for t, y in enumerate(Y0) for c in range(w.size(y))]
    used = set()
    pivots: dict = {t: [] for t in range(len(Y0))}
    zero_rows = []
    for r in range(m):
        best = None
        for t, c in cols:
            if (t, c) in used:
                continue
            a = w.M[(x0, Y0[t])][r][c]
            if a.is_zero():
                continue
            key = (a.valuation(), t, c)
            if best is None or key < best:
                best = key
        if best is None:
            zero_rows.append(r)
            continue
        _, t, c = best
        y = Y0[t]
        w.row_scale(x0, r, 1 / w.M[(x0, y)][r][c])
        for t2, c2 in cols:
            if (t2, c2) == (t, c):
                continue
            a = w.M[(x0, Y0[t2])][r][c2]
            if a.is_zero():
                continue
            if t2 == t:
                w.col_add(y, c2, c, -a)
            else:
                w.t2e(Y0[t2], c2, y, c, -a)
        for r2 in range(m):
            if r2 != r:
                w.row_add(x0, r2, r, -w.M[(x0, y)][r2][c])
        used.add((t, c))
        pivots[t].append((r, c))
    one = fld.one
    for t, y in enumerate(Y0):
        _clear_units(w, x0, y, pivots[t], one, skip_cols=set(Y0))
    before = w.rep()
    z = b.partner.get(x0)
    index = _keep_index(w, set())
    pivot_rows = {r for t in pivots for r, _ in pivots[t]}
    index[x0] = (x0, zero_rows)
    if z is not None:
        index[z] = (z, zero_rows)
    new, sims, explicit, specials = [], [], [], []
    rw = _Rewrite()
    made = []
    for t, y in enumerate(Y0):
        if not pivots[t]:
            continue
        R = [r for r, _ in pivots[t]]
        U = [c for _, c in pivots[t]]
        index[y] = (y, [c for c in range(w.size(y)) if c not in U])
        z2 = b.partner.get(y)
        zs = z2s = None
        if z is not None:
            zs = f"{z}*{t}s{step}"
            index[zs] = (z, R)
            new.append(_NewElement(zs, b.side[z], z, True))
            explicit.append((zs, z, "prec"))
            for prev in made:
                explicit.append((prev, zs, "tri"))
            made.append(zs)
        if z2 is not None:
            z2s = f"{z2}*{t}s{step}"
            index[z2] = (z2, [c for c in range(w.size(z2)) if c not in U])
            index[z2s] = (z2, U)
            new.append(_NewElement(z2s, b.side[z2], z2, b.is_decorated(z2)))
            explicit.append((z2, z2s, "tri"))
        if zs and z2s:
            sims.append((zs, z2s))
            rw.pairs[(zs, z2s)] = ((z, x0, y, z2), (SIM, 0, SIM))
        elif zs:
            rw.lone[zs] = ((z, x0, y), (SIM, 0))
        elif z2s:
            rw.lone[z2s] = ((z2, y, x0), (SIM, 0))
        else:
            specials.extend([StringData(Word((x0, y), (0,)))] * len(R))
    assert len(pivot_rows) + len(zero_rows) == m
    nb = _derive(b, set(), new, sims, explicit)
    return nb, _crossout(w, nb, index), specials, rw, before


# ---------------------------------------------------------------------------
# one step and the driver


def _drop_empty(rep: Representation) -> Representation:
    b = rep.bunch
    keep = [x for x in b.elements if rep.size(x) > 0]
    if len(keep) == len(b.elements):
        return rep
    ks = set(keep)
    E = [x for x in b.E if x in ks]
    F = [x for x in b.F if x in ks]
    sim = [p for p in b.sim_pairs if p[0] in ks and p[1] in ks]
    dash = [p for p in b.dash_pairs if p[0] in ks and p[1] in ks]
    nb0 = DecoratedBunch(E, F, sim, dash)
    le = [p for p in b.lt if p[0] in ks and p[1] in ks
          and nb0.theta[p[0]] == nb0.theta[p[1]]]
    tri = [p for p in b.tri if p[0] in ks and p[1] in ks
           and (p[0] == p[1] or nb0.theta[p[0]] == nb0.theta[p[1]])]
    nb = DecoratedBunch(E, F, sim, dash, le, tri)
    blocks = {k: rep.block(*k) for k in nb.dash_pairs_EF()}
    return Representation(nb, rep.field, {x: rep.size(x) for x in keep}, blocks)


def reduce_step(rep: Representation, step: int = 0) -> StepResult:
    """One reduction step on a nonzero representation."""
    w = _Work.of(rep)
    lp = _leading(w)
    b = w.b
    dx, dy = b.is_decorated(lp.x0), b.is_decorated(lp.y0)
    partners = b.partner.get(lp.x0) == lp.y0
    if not dx and not dy:
        case = 2 if partners else 1
        out = _case_25(w, lp, step, False) if partners else _case_14(w, lp, step, False)
        log = w.log
    elif dx and dy:
        case = 5 if partners else 4
        out = _case_25(w, lp, step, True) if partners else _case_14(w, lp, step, True)
        log = w.log
    elif not dx:
        case = 3
        out = _case_3(w, lp, step)
        log = w.log
    else:
        case = 3
        wd = w.dual()
        # the dual reverses both orders
        lpd = LeadingPair(lp.y0, lp.x0, lp.d, tuple(reversed(lp.Y0)), tuple(reversed(lp.X0)))
        nbd, repd, specials, rw, befored = _case_3(wd, lpd, step)
        nb = nbd.dual()
        out = (nb, _undual(repd, nb), specials, rw, _undual(befored, b))
        log = _dual_log(wd.log)
    nb, new_rep, specials, rw, before = out
    return StepResult(case, lp, nb, new_rep, specials, log, rw, before)


def _undual(rep: Representation, b: DecoratedBunch) -> Representation:
    blocks = {(x, y): rep.block(y, x).transpose() for x, y in b.dash_pairs_EF()}
    return Representation(b, rep.field, {x: rep.size(x) for x in b.elements}, blocks)


@dataclass
class DecompositionReport:
    strings: list
    bands: list
    steps: int
    moveLog: list
    levels: list = dc_field(default_factory=list)

    def to_json(self, field=None) -> dict:
        out_bands = []
        for band in self.bands:
            ring = field.base if field is not None and _is_decorated_band(band) else field
            out_bands.append({"cycle": str(band.cycle), "m": band.m,
                              "phi": band.phi_str(ring) if ring is not None else [str(c) for c in band.phi]})
        return {"strings": [str(s.word) for s in self.strings], "bands": out_bands, "steps": self.steps}


def _is_decorated_band(band: BandData) -> bool:
    return not hasattr(band.phi[0], "valuation")


def _trivial_strings(rep: Representation) -> list:
    b = rep.bunch
    out = []
    for cls in b.sim_classes:
        s = rep.size(cls[0])
        if s == 0:
            continue
        if len(cls) == 2:
            word = Word((cls[0], cls[1]), (SIM,))
        else:
            word = Word((cls[0],), ())
        out.extend([StringData(word)] * s)
    return out


def _support(rep: Representation) -> int:
    return rep.total_size()


def decompose(rep: Representation) -> DecompositionReport:
    """Split a representation into strings and bands over its own bunch."""
    b0 = rep.bunch
    cur = _drop_empty(rep)
    limit = 10 * max(_support(rep), 1) ** 2
    rewrites: list[_Rewrite] = []
    found: list[tuple[int, object]] = []
    levels = []
    steps = 0
    while True:
        nonzero = any(not m.is_zero() for m in cur.blocks.values())
        if not nonzero:
            found.extend((len(rewrites), s) for s in _trivial_strings(cur))
            break
        if steps >= limit:
            raise NoProgress(f"no termination after {steps} steps")
        size_before = cur.total_size()
        res = reduce_step(cur, steps)
        steps += 1
        levels.append((cur, res.log, res.before))
        found.extend((len(rewrites), s) for s in res.specials)
        rewrites.append(res.rewrite)
        cur = _drop_empty(res.rep)
        if cur.total_size() >= size_before:
            raise NoProgress("a reduction step did not shrink the representation")
    strings, bands = [], []
    for level, item in found:
        word = item.word if isinstance(item, StringData) else item.cycle
        for rw in reversed(rewrites[:level]):
            word = rw.apply(word)
        if isinstance(item, StringData):
            strings.append(StringData(oriented(b0, word)))
        else:
            bands.append(BandData(canonicalize(b0, word), item.m, item.phi))
    strings.sort(key=lambda s: string_key(b0, s.word))
    bands.sort(key=lambda x: (str(x.cycle), x.m, str(x.phi)))
    return DecompositionReport(strings, bands, steps, [lv[1] for lv in levels], levels)


def certify(report: DecompositionReport) -> bool:
    """Replay every level's moves and compare with the recorded state."""
    from .reps import replay
    return all(replay(inp, log) == out for inp, log, out in report.levels)


# ---------------------------------------------------------------------------
# isomorphism test


def _phi_reversed(phi):
    ring = phi[0].field if hasattr(phi[0], "field") else None
    return tpoly_reverse_monic(ring, phi)


def bands_match(b: DecoratedBunch, A: BandData, B: BandData) -> bool:
    if A.m != B.m or len(A.phi) != len(B.phi):
        return False
    for _, _, parity in cycle_matches(b, A.cycle, B.cycle):
        target = A.phi if parity == "even" else _phi_reversed(A.phi)
        if tuple(target) == tuple(B.phi):
            return True
    return False


def same_decomposition(b: DecoratedBunch, ra: DecompositionReport, rb: DecompositionReport) -> bool:
    if Counter(string_key(b, s.word) for s in ra.strings) != Counter(string_key(b, s.word) for s in rb.strings):
        return False
    if len(ra.bands) != len(rb.bands):
        return False
    left = list(rb.bands)
    for band in ra.bands:
        hit = next((i for i, other in enumerate(left) if bands_match(b, band, other)), None)
        if hit is None:
            return False
        left.pop(hit)
    return True


def isomorphic(M: Representation, N: Representation) -> bool:
    if M.bunch != N.bunch:
        return False
    if any(M.size(x) != N.size(x) for x in M.bunch.elements):
        return False
    return same_decomposition(M.bunch, decompose(M), decompose(N))
