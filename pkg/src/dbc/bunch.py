"""Decorated bunches of chains: data, axiom checks and coefficient rings."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from itertools import combinations


class UnknownElement(KeyError):
    pass


class CoeffRing(str, Enum):
    ZERO = "Zero"
    K = "K"
    D = "D"
    ZD = "pD"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Violation:
    kind: str
    elements: tuple
    message: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "elements": list(self.elements), "message": self.message}

    def __str__(self):
        return f"{self.kind}{{{','.join(self.elements)}}}" + (f": {self.message}" if self.message else "")


def _closure(pairs: set, elements) -> set:
    """Strict transitive closure of a relation given as a set of pairs."""
    succ = {x: set() for x in elements}
    for a, b in pairs:
        if a != b:
            succ.setdefault(a, set()).add(b)
    out = set()
    for x in list(succ):
        seen = set()
        stack = list(succ[x])
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            stack.extend(succ.get(y, ()))
        for y in seen:
            out.add((x, y))
    return out


class DecoratedBunch:
    """The datum {E, F, ~, -, <=, tri}.

    ``le`` is stored transitively closed (strict part in ``lt``); ``tri``
    holds the decorated relation including reflexive pairs (x, x) for x in
    Delta.  Element names are opaque strings.
    """

    def __init__(self, E, F, sim=(), dash=(), le=(), tri=()):
        self.E = tuple(E)
        self.F = tuple(F)
        self.elements = self.E + self.F
        self.side = {x: "E" for x in self.E}
        self.side.update({x: "F" for x in self.F})
        self._unknown = []
        self._duplicates = sorted(set(self.E) & set(self.F))
        self.sim_pairs = tuple(tuple(p) for p in sim)
        self.dash_pairs = tuple(tuple(p) for p in dash)
        self.le_pairs = tuple(tuple(p) for p in le)
        for rel in (self.sim_pairs, self.dash_pairs, self.le_pairs, tuple(tuple(p) for p in tri)):
            for p in rel:
                for x in p:
                    if x not in self.side:
                        self._unknown.append(x)

        # ~ classes
        parent = {x: x for x in self.elements}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.sim_pairs:
            if a in parent and b in parent:
                parent[find(a)] = find(b)
        classes: dict[str, list] = {}
        for x in self.elements:
            classes.setdefault(find(x), []).append(x)
        self.sim_classes = [tuple(c) for c in classes.values()]
        self.partner = {}
        for c in self.sim_classes:
            if len(c) == 2:
                self.partner[c[0]] = c[1]
                self.partner[c[1]] = c[0]

        # dashes
        self.adj = {x: set() for x in self.elements}
        for a, b in self.dash_pairs:
            if a in self.adj and b in self.adj:
                self.adj[a].add(b)
                self.adj[b].add(a)

        # theta classes
        tparent = {x: x for x in self.elements}

        def tfind(x):
            while tparent[x] != x:
                tparent[x] = tparent[tparent[x]]
                x = tparent[x]
            return x

        for a, b in self.dash_pairs:
            if a in tparent and b in tparent:
                tparent[tfind(a)] = tfind(b)
        self.theta = {x: tfind(x) for x in self.elements}

        # orders
        known = [(a, b) for a, b in self.le_pairs if a in self.side and b in self.side]
        tri = {(a, b) for a, b in (tuple(p) for p in tri) if a in self.side and b in self.side}
        self.lt = _closure(set(known) | {p for p in tri if p[0] != p[1]}, self.elements)
        self.tri = frozenset(tri)
        self.delta = frozenset(x for x in self.elements if (x, x) in self.tri)
        self._chains = None

    # -- basic queries ----------------------------------------------------
    def _check(self, *xs):
        for x in xs:
            if x not in self.side:
                raise UnknownElement(x)

    def is_decorated(self, x) -> bool:
        return x in self.delta

    def le(self, x, y) -> bool:
        return x == y or (x, y) in self.lt

    def less(self, x, y) -> bool:
        return (x, y) in self.lt

    def tri_le(self, x, y) -> bool:
        return (x, y) in self.tri

    def tri_less(self, x, y) -> bool:
        """x strictly below y inside the decorated relation."""
        return x != y and (x, y) in self.tri

    def prec(self, x, y) -> bool:
        """x < y but not x tri y."""
        return (x, y) in self.lt and (x, y) not in self.tri

    def comparable(self, x, y) -> bool:
        return x == y or (x, y) in self.lt or (y, x) in self.lt

    def dash(self, x, y) -> bool:
        return y in self.adj.get(x, ())

    def parallel(self, x, y) -> bool:
        return self.side[x] == self.side[y]

    def chain(self, x) -> list:
        """The chain E_c or F_c containing x, in increasing order."""
        if self._chains is None:
            self._chains = {}
            groups: dict[tuple, list] = {}
            for y in self.elements:
                groups.setdefault((self.theta[y], self.side[y]), []).append(y)
            pos = {y: i for i, y in enumerate(self.elements)}
            for members in groups.values():
                snapshot = tuple(members)
                members.sort(key=lambda y: (sum(1 for w in snapshot if self.less(w, y)), pos[y]))
                for y in members:
                    self._chains[y] = members
        return self._chains[x]

    def dash_pairs_EF(self) -> list[tuple]:
        """The set X(2) of pairs (x, y), x in E, y in F, x - y, in a fixed order."""
        out = []
        for x in self.E:
            for y in self.F:
                if y in self.adj[x]:
                    out.append((x, y))
        return out

    # -- coefficient rings --------------------------------------------------
    def coefficient_ring(self, x, y) -> CoeffRing:
        """C(x, y): the ring of maps from stripe x to stripe y."""
        self._check(x, y)
        if x == y:
            return CoeffRing.D if x in self.delta else CoeffRing.K
        if not self.comparable(x, y):
            return CoeffRing.ZERO
        if self.less(x, y):
            return CoeffRing.ZD if self.tri_less(x, y) else CoeffRing.ZERO
        return CoeffRing.D if self.tri_less(y, x) else CoeffRing.K

    def bimodule_ring(self, x, y) -> CoeffRing:
        self._check(x, y)
        if self.side[x] == "F" and self.side[y] == "E" and self.dash(x, y):
            return CoeffRing.K
        return CoeffRing.ZERO

    def tri_intervals(self) -> list[tuple]:
        """Maximal subchains on which every comparable pair is in tri."""
        seen = set()
        out = []
        for x in self.elements:
            if x in seen:
                continue
            chain = self.chain(x)
            current: list = []
            for y in chain:
                if current and all(self.tri_less(w, y) for w in current):
                    current.append(y)
                else:
                    if current:
                        out.append(tuple(current))
                    current = [y]
            out.append(tuple(current))
            seen.update(chain)
        return out

    def interval_of(self, x) -> tuple:
        for iv in self.tri_intervals():
            if x in iv:
                return iv
        raise UnknownElement(x)

    # -- validation -----------------------------------------------------------
    def validate(self) -> list[Violation]:
        v: list[Violation] = []
        for x in sorted(set(self._unknown)):
            v.append(Violation("UnknownElement", (x,)))
        for x in self._duplicates:
            v.append(Violation("ElementInBothSides", (x,)))
        for a, b in self.dash_pairs:
            if a in self.side and b in self.side and self.side[a] == self.side[b]:
                v.append(Violation("DashNotPerpendicular", (a, b), "x-y requires one element in E and one in F"))
        for a, b in self.sim_pairs:
            if a == b:
                v.append(Violation("TrivialSimPair", (a,)))
        for c in self.sim_classes:
            if len(c) > 2:
                v.append(Violation("SimClassTooLarge", tuple(c), "a ~-class has at most two elements"))
        for a, b in sorted(self.lt):
            if (b, a) in self.lt:
                if a < b:
                    v.append(Violation("OrderNotAntisymmetric", (a, b)))
                continue
            if self.side[a] != self.side[b] or self.theta[a] != self.theta[b]:
                v.append(Violation("OrderNotConcentrated", (a, b), "x<=y needs x,y on one side and in one theta-class"))
        for a, b in sorted(self.tri):
            if a != b and (a, b) not in self.lt:
                v.append(Violation("TriNotInOrder", (a, b)))
        # (i) chains
        groups: dict[tuple, list] = {}
        for x in self.elements:
            groups.setdefault((self.theta[x], self.side[x]), []).append(x)
        for members in groups.values():
            for a, b in combinations(members, 2):
                if not self.comparable(a, b):
                    v.append(Violation("NotAChain", (a, b), "elements of E_c / F_c must be comparable"))
        # (ii) decorations along ~
        for c in self.sim_classes:
            dec = [x in self.delta for x in c]
            if any(dec) and not all(dec):
                v.append(Violation("DecorationMismatch", tuple(c), "x~y and x decorated force y decorated"))
        # (iii)
        for (x, x2) in sorted(self.lt):
            for (y, y2) in sorted(self.lt):
                if self.dash(x, y2) and self.dash(x2, y) and self.dash(x2, y2) and not self.dash(x, y):
                    v.append(Violation("AxiomIII", (x, x2, y, y2), "x<x', y<y', x-y', x'-y, x'-y' force x-y"))
        # convexity of tri inside <=
        for (x, z) in sorted(self.tri):
            if x == z:
                continue
            if (x, x) not in self.tri or (z, z) not in self.tri:
                v.append(Violation("ConvexityViolation", (x, z), "x tri z forces x tri x and z tri z"))
            for y in self.elements:
                if self.less(x, y) and self.less(y, z):
                    if (x, y) not in self.tri or (y, z) not in self.tri:
                        v.append(Violation("ConvexityViolation", (x, y, z), "x<=y<=z and x tri z force x tri y, y tri z"))
        return v

    # -- transformations ----------------------------------------------------
    def dual(self) -> "DecoratedBunch":
        """Swap E and F and reverse both orders; ~ and - are kept."""
        return DecoratedBunch(
            self.F, self.E, self.sim_pairs, [(b, a) for a, b in self.dash_pairs],
            [(b, a) for a, b in self.lt], [(b, a) for a, b in self.tri],
        )

    # -- serialisation --------------------------------------------------------
    def to_json(self) -> dict:
        cover = sorted((a, b) for a, b in self.lt
                       if not any((a, c) in self.lt and (c, b) in self.lt for c in self.elements))
        return {
            "E": list(self.E),
            "F": list(self.F),
            "sim": [list(p) for p in self.sim_pairs],
            "dash": [list(p) for p in self.dash_pairs],
            "le": [list(p) for p in cover],
            "tri": [list(p) for p in sorted(self.tri, key=lambda p: (self.elements.index(p[0]), self.elements.index(p[1])))],
        }

    @classmethod
    def from_json(cls, data) -> "DecoratedBunch":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(data["E"], data["F"], data.get("sim", ()), data.get("dash", ()),
                       data.get("le", ()), data.get("tri", ()))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed bunch JSON: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, DecoratedBunch):
            return NotImplemented
        return (set(self.E) == set(other.E) and set(self.F) == set(other.F)
                and {frozenset(c) for c in self.sim_classes} == {frozenset(c) for c in other.sim_classes}
                and {frozenset(p) for p in self.dash_pairs} == {frozenset(p) for p in other.dash_pairs}
                and self.lt == other.lt and self.tri == other.tri)

    def __hash__(self):
        return hash((frozenset(self.E), frozenset(self.F)))

    def __repr__(self):
        return f"DecoratedBunch(E={list(self.E)}, F={list(self.F)})"


def validate(b: DecoratedBunch) -> list[Violation]:
    return b.validate()


def coefficient_ring(b: DecoratedBunch, x, y) -> CoeffRing:
    return b.coefficient_ring(x, y)


def bimodule_ring(b: DecoratedBunch, x, y) -> CoeffRing:
    return b.bimodule_ring(x, y)


def tri_intervals(b: DecoratedBunch) -> list[tuple]:
    return b.tri_intervals()
