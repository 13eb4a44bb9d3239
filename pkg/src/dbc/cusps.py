"""Cyclic quotient combinatorics, cusp bunches and the equation catalog."""

from __future__ import annotations

import ast
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import flint

from .bunch import DecoratedBunch


class BadPair(ValueError):
    pass


class BadType(ValueError):
    pass


class BadCase(ValueError):
    pass


class BadParams(ValueError):
    pass


def _check_pair(n: int, m: int, allow_trivial: bool = True):
    if (n, m) == (1, 0) and allow_trivial:
        return
    if not (isinstance(n, int) and isinstance(m, int)) or n < 2 or not 0 < m < n or gcd(n, m) != 1:
        raise BadPair(f"({n},{m}) is not a coprime pair with 0 < m < n")


def negative_fraction(p: int, q: int) -> tuple[int, ...]:
    """Entries b_i >= 2 with p/q = b_1 - 1/(b_2 - ... - 1/b_f), p > q > 0."""
    out = []
    while q:
        b = -(-p // q)
        out.append(b)
        p, q = q, b * q - p
    return tuple(out)


def fold_negative(entries) -> Fraction:
    """Evaluate b_1 - 1/(b_2 - ... - 1/b_f)."""
    val = Fraction(entries[-1])
    for b in reversed(entries[:-1]):
        val = b - 1 / val
    return val


@dataclass(frozen=True)
class HJExpansion:
    n: int
    m: int
    a: tuple
    cExp: tuple
    dExp: tuple

    @property
    def e(self) -> int:
        return len(self.a)

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "a": list(self.a), "c": list(self.cExp), "d": list(self.dExp)}


def hj_expansion(n: int, m: int) -> HJExpansion:
    """n/(n-m) as a negative continued fraction with exponent sequences."""
    _check_pair(n, m)
    if (n, m) == (1, 0):
        return HJExpansion(1, 0, (), (1, 0), (0, 1))
    a = negative_fraction(n, n - m)
    c = [n, n - m]
    d = [0, 1]
    for ai in a:
        c.append(ai * c[-1] - c[-2])
        d.append(ai * d[-1] - d[-2])
    return HJExpansion(n, m, a, tuple(c), tuple(d))


def check_quotient_relations(n: int, m: int) -> list[str]:
    """Failures of the monomial relations x_{i-1} x_{j+1} = x_i x_j prod x_k^(a_k - 2);
    empty when everything holds."""
    h = hj_expansion(n, m)
    a, c, d = h.a, h.cExp, h.dExp
    bad = []
    if c[-1] != 0 or d[-1] != n:
        bad.append(f"end values c={c[-1]}, d={d[-1]}")
    for i in range(1, h.e + 1):
        for j in range(i, h.e + 1):
            for name, s in (("c", c), ("d", d)):
                rhs = s[i] + s[j] + sum((a[k - 1] - 2) * s[k] for k in range(i, j + 1))
                if s[i - 1] + s[j + 1] != rhs:
                    bad.append(f"{name}: i={i}, j={j}")
    return bad


@dataclass(frozen=True)
class PiPoset:
    n: int
    m: int
    bar: tuple

    @property
    def elements(self) -> tuple:
        return tuple(range(self.n))

    def order_x(self) -> list[int]:
        return list(range(self.n))

    def order_y(self) -> list[int]:
        return sorted(range(self.n), key=lambda p: self.bar[p])

    def le_x(self, p: int, q: int) -> bool:
        return p <= q

    def le_y(self, p: int, q: int) -> bool:
        return self.bar[p] <= self.bar[q]

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "bar": list(self.bar), "order_y": self.order_y()}


def pi_poset(n: int, m: int) -> PiPoset:
    _check_pair(n, m)
    if n == 1:
        return PiPoset(1, 0, (0,))
    inv = pow(m, -1, n)
    return PiPoset(n, m, tuple((l * inv) % n for l in range(n)))


def dual_graph(n: int, m: int) -> tuple[int, ...]:
    """Self-intersection numbers -b_i of the resolution chain: n/m."""
    _check_pair(n, m, allow_trivial=False)
    return negative_fraction(n, m)


# ---------------------------------------------------------------------------
# bunches


def parse_type(text: str) -> tuple:
    """Parse ``(3,1),(2,1)`` into ((3,1),(2,1))."""
    try:
        val = ast.literal_eval(f"({text},)" if not text.strip().startswith("((") else text)
    except (ValueError, SyntaxError) as exc:
        raise BadType(f"cannot parse cusp type {text!r}") from exc
    if isinstance(val, tuple) and len(val) == 2 and all(isinstance(v, int) for v in val):
        val = (val,)
    return check_type(val)


def check_type(T) -> tuple:
    try:
        pairs = tuple((int(n), int(m)) for n, m in T)
    except (TypeError, ValueError) as exc:
        raise BadType(f"malformed cusp type {T!r}") from exc
    if not pairs:
        raise BadType("a cusp type needs at least one pair")
    for n, m in pairs:
        try:
            _check_pair(n, m)
        except BadPair as exc:
            raise BadType(str(exc)) from exc
    return pairs


def _names(i: int, p: int) -> tuple[str, str]:
    return f"x{i}_{p}", f"y{i}_{p}"


def _stripes(i: int, n: int, m: int, with_x: bool, with_y: bool):
    """E-elements, partner pairs and decorated orders for pair i."""
    pi = pi_poset(n, m)
    E, sim, tri = [], [], []
    xs = [_names(i, p)[0] for p in pi.order_x()] if with_x else []
    ys = [_names(i, p)[1] for p in pi.order_y()] if with_y else []
    E.extend(xs)
    E.extend(ys)
    if with_x and with_y:
        sim.extend(_names(i, p) for p in range(n))
    for chain in (xs, ys):
        for a, u in enumerate(chain):
            tri.append((u, u))
            tri.extend((u, v) for v in chain[a + 1:])
    return E, sim, tri, xs, ys


def cusp_bunch(T) -> DecoratedBunch:
    """Bunch of the degenerate cusp of type T.

    Pair i contributes column elements xi<i>, eta<i> (eta<i> ~ xi<i+1>,
    cyclically) and decorated row stripes x<i>_<p> ~ y<i>_<p>, p in
    Pi(n_i, m_i); the x-stripes meet xi<i>, the y-stripes meet eta<i>.
    """
    pairs = check_type(T)
    t = len(pairs)
    E, F, sim, dash, tri = [], [], [], [], []
    for i, (n, m) in enumerate(pairs, 1):
        e, s, tr, xs, ys = _stripes(i, n, m, True, True)
        E += e
        sim += s
        tri += tr
        F += [f"xi{i}", f"eta{i}"]
        dash += [(x, f"xi{i}") for x in xs] + [(y, f"eta{i}") for y in ys]
    for i in range(1, t + 1):
        sim.append((f"eta{i}", f"xi{i % t + 1}"))
    return DecoratedBunch(E, F, sim, dash, (), tri)


def atype_bunch(T) -> DecoratedBunch:
    """The acyclic variant: columns xi2..xi_t and eta1..eta_{t-1}."""
    pairs = check_type(T)
    t = len(pairs)
    if t < 2:
        raise BadType("an A-type chain needs at least two pairs")
    E, F, sim, dash, tri = [], [], [], [], []
    for i, (n, m) in enumerate(pairs, 1):
        e, s, tr, xs, ys = _stripes(i, n, m, i > 1, i < t)
        E += e
        sim += s
        tri += tr
        if i > 1:
            F.append(f"xi{i}")
            dash += [(x, f"xi{i}") for x in xs]
        if i < t:
            F.append(f"eta{i}")
            dash += [(y, f"eta{i}") for y in ys]
    for i in range(1, t):
        sim.append((f"eta{i}", f"xi{i + 1}"))
    return DecoratedBunch(E, F, sim, dash, (), tri)


# ---------------------------------------------------------------------------
# equation catalog


@dataclass
class CatalogEntry:
    case: int
    params: dict
    substitutions: dict
    relations: list
    verified: bool
    failures: list
    note: str = ""

    def to_json(self) -> dict:
        return {"case": self.case, "params": self.params,
                "substitutions": self.substitutions, "relations": self.relations,
                "verified": self.verified, "failures": self.failures, "note": self.note}


class _Ring:
    """Polynomial ring over Z in named variables."""

    def __init__(self, names):
        self.ctx = flint.fmpz_mpoly_ctx.get(tuple(names))
        self.vars = dict(zip(names, self.ctx.gens()))

    def quotient_chain(self, prefix: str, pair):
        """Monomial images x_i = s^c_i t^d_i of a cyclic quotient's generators."""
        h = hj_expansion(*pair)
        s, t = self.vars[f"{prefix}s"], self.vars[f"{prefix}t"]
        return [s ** c * t ** d for c, d in zip(h.cExp, h.dExp)]


def _pair_from_fraction(a) -> tuple[int, int]:
    """(n, m) with n/(n-m) = a_1 - 1/(a_2 - ...)."""
    f = fold_negative(a)
    n, q = f.numerator, f.denominator
    return n, n - q


def _eval(expr: str, env: dict):
    tree = ast.parse(expr.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.BinOp):
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Pow):
                return left ** right
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        raise ValueError(f"unsupported expression {expr!r}")

    return ev(tree.body)


def _prod(*factors) -> str:
    """Product of (name, exponent) factors with repeated names merged."""
    exps: dict = {}
    for name, e in factors:
        exps[name] = exps.get(name, 0) + e
    parts = [name if e == 1 else f"{name}^{e}" for name, e in exps.items() if e]
    return "*".join(parts) if parts else "1"


def _case5_relations(a) -> list[str]:
    e = len(a)
    x = [None] + [f"x{i}" for i in range(1, e + 1)]

    def span(lo, hi):
        return [(x[l], a[l - 1] - 2) for l in range(lo, hi + 1)]

    rels = []
    for i in range(2, e):
        left = _prod((x[1], 1), *span(1, i - 1), (x[i - 1], 1))
        right = _prod((x[i + 1], 1), *span(i + 1, e), (x[e], 1))
        rels.append(f"z*{x[i]} - ({left}) - ({right})")
    for i in range(2, e):
        for j in range(i, e):
            rels.append(f"{x[i - 1]}*{x[j + 1]} - {_prod((x[i], 1), *span(i, j), (x[j], 1))}")
    return rels


def equation_catalog(case: int, p: int = 2, q: int = 2, r: int = 2, a=None) -> CatalogEntry:
    """Generators of the cusp ring inside its normalization and the
    defining relations, checked by substitution."""
    if case not in range(1, 13):
        raise BadCase(f"no catalog case {case}")
    for name, val in (("p", p), ("q", q), ("r", r)):
        if not isinstance(val, int) or val < 2:
            raise BadParams(f"{name} must be an integer >= 2")
    note = ""
    params: dict = {}
    # each component: list of monomial images; substitutions: generator -> tuple over components
    if case == 1:
        ring = _Ring(["u", "v"])
        u, v = ring.vars["u"], ring.vars["v"]
        comps = [{"x": u + v, "y": u * v, "z": u ** 2 * v}]
        rels = ["y^3 + z^2 - x*y*z"]
    elif case == 2:
        n = p
        params = {"n": n}
        ring = _Ring(["s", "t"])
        x0, x1, x2 = ring.quotient_chain("", (n, n - 1))
        comps = [{"x": x1, "y": x0 * x1, "z": x0 + x2}]
        rels = [f"x^{n + 2} + y^2 - x*y*z"]
    elif case == 3:
        params = {"p": p, "q": q}
        ring = _Ring(["s", "t"])
        xs = ring.quotient_chain("", _pair_from_fraction((p, q)))
        comps = [{"x": xs[1], "y": xs[2], "z": xs[0] + xs[3]}]
        rels = [f"x^{p + 1} + y^{q + 1} - x*y*z"]
    elif case == 4:
        params = {"p": p, "q": q, "r": r}
        ring = _Ring(["s", "t"])
        u, x, y, z, v = ring.quotient_chain("", _pair_from_fraction((p, q, r)))
        comps = [{"x": x, "y": y, "z": z, "w": u + v}]
        rels = [f"x*z - y^{q}", f"y*w - x^{p} - z^{r}"]
    elif case == 5:
        a = tuple(a) if a is not None else (p, q, r, 2)
        if len(a) < 4 or any(ai < 2 for ai in a):
            raise BadParams("case 5 needs a_1..a_e with e >= 4 and all a_i >= 2")
        params = {"a": list(a)}
        ring = _Ring(["s", "t"])
        xs = ring.quotient_chain("", _pair_from_fraction(a))
        e = len(a)
        env = {f"x{i}": xs[i] for i in range(1, e + 1)}
        env["z"] = xs[0] + xs[e + 1]
        comps = [env]
        rels = _case5_relations(a)
        note = "z*x_{e-1} includes the term x_e^(a_e)"
    elif case == 6:
        ring = _Ring(["x1", "x2", "y1", "y2"])
        V = ring.vars
        comps = [{"x": V["x1"], "y": V["x2"], "z": V["x1"] * V["x2"]},
                 {"x": V["y2"], "y": V["y1"], "z": 0 * V["y1"]}]
        rels = ["x*y*z - z^2"]
    elif case == 7:
        params = {"p": p}
        ring = _Ring(["x1", "x2", "s", "t"])
        V = ring.vars
        y0, y1, y2 = ring.quotient_chain("", (p, p - 1))
        comps = [{"x": V["x1"], "y": V["x2"], "z": 0 * V["x1"]},
                 {"x": y0, "y": y2, "z": y1}]
        rels = [f"x*y*z - z^{p + 1}"]
    elif case == 8:
        ring = _Ring(["x1", "x2", "y1", "y2", "z1", "z2"])
        V = ring.vars
        zero = 0 * V["x1"]
        comps = [{"x": V["x2"], "y": zero, "z": V["x1"]},
                 {"x": V["y1"], "y": V["y2"], "z": zero},
                 {"x": zero, "y": V["z1"], "z": V["z2"]}]
        rels = ["x*y*z"]
    elif case == 9:
        params = {"p": p, "q": q}
        ring = _Ring(["as", "at", "bs", "bt"])
        x0, x1, x2 = ring.quotient_chain("a", (p, p - 1))
        y0, y1, y2 = ring.quotient_chain("b", (q, q - 1))
        zero = 0 * x0
        comps = [{"x": x0, "y": x2, "z": x1, "w": zero},
                 {"x": y2, "y": y0, "z": zero, "w": y1}]
        rels = [f"z^{p} + w^{q} - x*y", "w*z"]
    elif case == 10:
        params = {"p": p, "q": q}
        ring = _Ring(["x1", "x2", "s", "t"])
        V = ring.vars
        y0, y1, y2, y3 = ring.quotient_chain("", _pair_from_fraction((p, q)))
        zero = 0 * y0
        comps = [{"x": V["x1"], "y": V["x2"], "z": zero, "w": zero},
                 {"x": y3, "y": y0, "z": y1, "w": y2}]
        rels = [f"y*w - z^{p}", f"x*z - w^{q}"]
    elif case == 11:
        params = {"p": p}
        ring = _Ring(["x1", "x2", "y1", "y2", "s", "t"])
        V = ring.vars
        z0, z1, z2 = ring.quotient_chain("", (p, p - 1))
        zero = 0 * z0
        comps = [{"x": V["x2"], "y": zero, "z": V["x1"], "w": zero},
                 {"x": V["y1"], "y": V["y2"], "z": zero, "w": zero},
                 {"x": zero, "y": z0, "z": z2, "w": z1}]
        rels = ["x*w", f"y*z - w^{p}"]
    else:
        ring = _Ring(["x1", "x2", "y1", "y2", "z1", "z2", "w1", "w2"])
        V = ring.vars
        zero = 0 * V["x1"]
        comps = [{"x": V["x2"], "y": zero, "z": zero, "w": V["x1"]},
                 {"x": V["y1"], "y": V["y2"], "z": zero, "w": zero},
                 {"x": zero, "y": V["z1"], "z": V["z2"], "w": zero},
                 {"x": zero, "y": zero, "z": V["w1"], "w": V["w2"]}]
        rels = ["x*z", "y*w"]
    gens = list(comps[0])
    subs = {g: [str(c[g]) for c in comps] for g in gens}
    failures = []
    for rel in rels:
        for idx, env in enumerate(comps):
            val = _eval(rel, env)
            if not (val == 0 or (hasattr(val, "is_zero") and val.is_zero())):
                failures.append(f"{rel} on component {idx + 1}")
    return CatalogEntry(case, params, subs, rels, not failures, failures, note)
