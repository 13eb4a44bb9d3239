"""Polynomial matrices, module generators and matrix-factorization checks.

Polynomials are python-flint multivariate polynomials over k (rationals or
F_p) in named variables.  A presentation of a module over a hypersurface ring
S/f is a square matrix over S; it is sound when its determinant is a unit
times a power of f.  Nothing here computes syzygies or Groebner bases: every
family comes with closed-form generators and relations, and the checks are
products, determinants and exact divisions.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import flint

from .scalars import BaseField, rationals


class ArityMismatch(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class BadFamily(ValueError):
    pass


class BadParams(ValueError):
    pass


class BadBandData(ValueError):
    pass


class PolyParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomial rings


class PolyRing:
    """k[names] backed by fmpq_mpoly (rationals) or nmod_mpoly (F_p)."""

    def __init__(self, names, base: BaseField | None = None):
        self.base = base or rationals()
        self.names = tuple(names)
        if self.base.p is None:
            self.ctx = flint.fmpq_mpoly_ctx.get(self.names)
        else:
            self.ctx = flint.nmod_mpoly_ctx.get(self.names, modulus=self.base.p)
        self.gens = dict(zip(self.names, self.ctx.gens()))

    def __getitem__(self, name):
        return self.gens[name]

    def __eq__(self, other):
        return isinstance(other, PolyRing) and (self.names, self.base) == (other.names, other.base)

    def __hash__(self):
        return hash((self.names, self.base))

    def const(self, c):
        """The constant polynomial c; c may be an int, a Fraction or a k element."""
        if isinstance(c, Fraction):
            return self.const(c.numerator) / self.const(c.denominator)
        if self.base.p is not None:
            c = int(c) % self.base.p
        return self.ctx.constant(c)

    @property
    def zero(self):
        return self.ctx.constant(0)

    @property
    def one(self):
        return self.ctx.constant(1)

    def scalar(self, c):
        """Coerce a base-field scalar (flint fmpq or nmod) to a constant."""
        if self.base.p is None:
            return self.ctx.constant(flint.fmpq(c))
        return self.ctx.constant(int(c) % self.base.p)

    def sqrt_minus_one(self):
        """A square root of -1 in k, or None."""
        p = self.base.p
        if p is None or p % 4 != 1:
            return None
        for g in range(2, p):
            r = pow(g, (p - 1) // 4, p)
            if r * r % p == p - 1:
                return r
        return None

    def parse(self, text: str):
        """Parse +, -, *, ^ (or **), integer division by constants, and the
        symbol i for a square root of -1 when k has one."""
        try:
            tree = ast.parse(str(text).replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise PolyParseError(f"cannot parse {text!r}") from exc
        return self._ev(tree.body, text)

    def _ev(self, node, text):
        if isinstance(node, ast.BinOp):
            a, b = self._ev(node.left, text), self._ev(node.right, text)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Pow):
                if not b.is_constant():
                    raise PolyParseError(f"non-constant exponent in {text!r}")
                e = int(b.leading_coefficient()) if not b.is_zero() else 0
                if e < 0:
                    raise PolyParseError(f"negative exponent in {text!r}")
                return a ** e
            if isinstance(node.op, ast.Div):
                if not b.is_constant() or b.is_zero():
                    raise PolyParseError(f"division by a non-constant in {text!r}")
                return a * (self.one / b)
        if isinstance(node, ast.UnaryOp):
            v = self._ev(node.operand, text)
            if isinstance(node.op, ast.USub):
                return -v
            if isinstance(node.op, ast.UAdd):
                return v
        if isinstance(node, ast.Name):
            if node.id in self.gens:
                return self.gens[node.id]
            if node.id == "i":
                r = self.sqrt_minus_one()
                if r is None:
                    raise PolyParseError("i needs F_p with p = 1 mod 4")
                return self.const(r)
            raise PolyParseError(f"unknown variable {node.id!r} in {text!r}")
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return self.const(node.value)
        raise PolyParseError(f"unsupported syntax in {text!r}")

    def to_str(self, a) -> str:
        return str(a) if not a.is_zero() else "0"


def infer_ring(texts, base: BaseField | None = None, extra=()) -> PolyRing:
    """The ring over the variables occurring in ``texts`` (sorted), i excluded."""
    names = set(extra)
    for t in texts:
        for node in ast.walk(ast.parse(str(t).replace("^", "**"), mode="eval")):
            if isinstance(node, ast.Name) and node.id != "i":
                names.add(node.id)
    return PolyRing(sorted(names), base)


def constant_term(ring: PolyRing, a):
    return a.to_dict().get((0,) * len(ring.names), 0)


# ---------------------------------------------------------------------------
# matrices over a polynomial ring


def _square(a):
    n = len(a)
    if any(len(r) != n for r in a):
        raise ShapeMismatch("matrix is not square")
    return n


def mat_mul(ring: PolyRing, a, b):
    if a and len(a[0]) != len(b):
        raise ShapeMismatch(f"cannot multiply {len(a)}x{len(a[0])} by {len(b)}x{len(b[0]) if b else 0}")
    cols = len(b[0]) if b else 0
    out = []
    for r in a:
        row = []
        for j in range(cols):
            s = ring.zero
            for k, x in enumerate(r):
                if not x.is_zero() and not b[k][j].is_zero():
                    s += x * b[k][j]
            row.append(s)
        out.append(row)
    return out


def transpose(a):
    return [list(c) for c in zip(*a)]


def determinant(ring: PolyRing, a):
    """Fraction-free Bareiss elimination; every division is exact."""
    n = _square(a)
    if n == 0:
        return ring.one
    m = [list(r) for r in a]
    sign = 1
    prev = ring.one
    for k in range(n - 1):
        if m[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not m[i][k].is_zero()), None)
            if swap is None:
                return ring.zero
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return m[n - 1][n - 1] if sign == 1 else -m[n - 1][n - 1]


def adjugate(ring: PolyRing, a):
    """Transposed cofactor matrix, so that a * adj(a) = det(a) * I."""
    n = _square(a)
    if n == 1:
        return [[ring.one]]
    out = [[ring.zero] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(a) if k != i]
            c = determinant(ring, minor)
            out[j][i] = c if (i + j) % 2 == 0 else -c
    return out


def substitute(ring: PolyRing, a, mapping: dict, target: PolyRing):
    """Replace every variable of ``ring`` by a polynomial of ``target``."""
    missing = [v for v in ring.names if v not in mapping]
    if missing:
        raise ArityMismatch(f"substitution leaves {missing} unmapped")
    images = [mapping[v] for v in ring.names]
    return a.compose(*images, ctx=target.ctx) if ring.names else a


def poly_ops(ring: PolyRing, a, b=None, op: str = "add", target: PolyRing | None = None):
    """Dispatcher for the basic operations on polynomials and matrices."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "substitute":
        return substitute(ring, a, b, target or ring)
    if op == "determinant":
        return determinant(ring, a)
    if op == "adjugate":
        return adjugate(ring, a)
    raise ValueError(f"unknown operation {op!r}")


def is_scalar_matrix(a, f) -> bool:
    n = len(a)
    return all(len(r) == n for r in a) and all(
        (a[i][j] == f) if i == j else a[i][j].is_zero() for i in range(n) for j in range(n))


# ---------------------------------------------------------------------------
# verification


@dataclass
class MFCheck:
    """Outcome of checking phi*psi = psi*phi = f*I."""

    ok: bool
    left: bool
    right: bool
    defects: list = dc_field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "phi_psi": self.left, "psi_phi": self.right, "defects": self.defects}


def verify_mf(ring: PolyRing, phi, psi, f) -> MFCheck:
    n = _square(phi)
    if _square(psi) != n:
        raise ShapeMismatch(f"phi is {n}x{n} but psi is {len(psi)}x{len(psi)}")
    defects = []
    results = []
    for label, prod in (("phi*psi", mat_mul(ring, phi, psi)), ("psi*phi", mat_mul(ring, psi, phi))):
        good = True
        for i in range(n):
            for j in range(n):
                want = f if i == j else ring.zero
                if prod[i][j] != want:
                    good = False
                    defects.append(f"{label}[{i}][{j}] = {ring.to_str(prod[i][j])}, expected {ring.to_str(want)}")
        results.append(good)
    return MFCheck(all(results), results[0], results[1], defects)


@dataclass
class DetFactor:
    s: int
    ok: bool
    unit: object
    det: object


def det_factor(ring: PolyRing, theta, f) -> DetFactor:
    """Write det(theta) = u * f^s with f not dividing u."""
    d = determinant(ring, theta)
    if d.is_zero():
        return DetFactor(0, False, d, d)
    s, u = 0, d
    while True:
        q, r = divmod(u, f)
        if not r.is_zero():
            break
        u, s = q, s + 1
    return DetFactor(s, constant_term(ring, u) != 0, u, d)


def det_unit_power(ring: PolyRing, theta, f) -> tuple[int, bool]:
    """(s, ok): det(theta) = u * f^s with u a unit of the power series ring."""
    r = det_factor(ring, theta, f)
    return r.s, r.ok


def mf_partner(ring: PolyRing, phi, f):
    """psi = f * phi^-1 when it is a polynomial matrix, else None."""
    r = det_factor(ring, phi, f)
    if not r.ok or not r.unit.is_constant():
        return None
    n = len(phi)
    scale = r.unit * f ** (r.s - 1)
    out = []
    for row in adjugate(ring, phi):
        new = []
        for a in row:
            q, rem = divmod(a, scale)
            if not rem.is_zero():
                return None
            new.append(q)
        out.append(new)
    return out if n else None


def relation_defects(ring: PolyRing, generators, matrix, ideal) -> list[int]:
    """Columns of ``matrix`` that are not relations among ``generators``
    modulo the monomial or principal ideal given by ``ideal``."""
    bad = []
    for j in range(len(matrix[0]) if matrix else 0):
        s = ring.zero
        for i, g in enumerate(generators):
            s += matrix[i][j] * g
        if not _in_ideal(ring, s, ideal):
            bad.append(j)
    return bad


def _in_ideal(ring: PolyRing, a, ideal) -> bool:
    """Membership in (f) for one generator; for several monomial generators
    every term of ``a`` must be divisible by one of them."""
    if a.is_zero():
        return True
    if len(ideal) == 1:
        return divmod(a, ideal[0])[1].is_zero()
    monos = [g.monoms()[0] for g in ideal]
    return all(any(all(e >= g for e, g in zip(m, mono)) for mono in monos) for m in a.monoms())


# ---------------------------------------------------------------------------
# generator matrices from canonical forms


def _zpoly_to(ring: PolyRing, a, var: str):
    """A polynomial element of k(z) rewritten in the variable ``var``."""
    if a.is_zero():
        return ring.zero
    if not a.is_polynomial():
        raise ShapeMismatch(f"entry {a} is not a polynomial in z")
    t = ring[var]
    out = ring.zero
    for e, c in enumerate(a.num.coeffs()):
        if c != 0:
            out += ring.scalar(c) * t ** e
    return out


def t23_thetas(rep):
    """(theta_u, theta_v) of a representation of the one-pair cusp bunch."""
    b = rep.bunch
    x, y = sorted(v for v in b.E if v.startswith("x")), sorted(v for v in b.E if v.startswith("y"))
    xi = [v for v in b.F if v.startswith("xi")]
    eta = [v for v in b.F if v.startswith("eta")]
    if len(x) != 1 or len(y) != 1 or len(xi) != 1 or len(eta) != 1:
        raise ShapeMismatch("not a representation of the one-pair cusp bunch")
    return rep.block(x[0], xi[0]), rep.block(y[0], eta[0])


def generator_matrix_T23(thetaU, thetaV, base: BaseField | None = None):
    """(x*I_q | y*I_q | theta) with theta = theta_u(u) + theta_v(v)."""
    if (thetaU.nrows, thetaU.ncols) != (thetaV.nrows, thetaV.ncols):
        raise ShapeMismatch("theta_u and theta_v differ in shape")
    ring = PolyRing(("x", "y", "u", "v"), base)
    q, p = thetaU.nrows, thetaU.ncols
    rows = []
    for i in range(q):
        row = [ring["x"] if j == i else ring.zero for j in range(q)]
        row += [ring["y"] if j == i else ring.zero for j in range(q)]
        row += [_zpoly_to(ring, thetaU.rows[i][j], "u") + _zpoly_to(ring, thetaV.rows[i][j], "v") for j in range(p)]
        rows.append(row)
    return ring, rows


def _check_omega_xyz(omega):
    omega = [tuple(int(a) for a in w) for w in omega]
    if not omega or any(len(w) != 6 for w in omega):
        raise BadBandData("omega must be a non-empty list of 6-tuples (a,b,c,d,e,f_next)")
    t = len(omega)
    # the f entry of tuple i belongs to index i+1 (cyclically)
    f = [omega[(i - 1) % t][5] for i in range(t)]
    for i, (a, b, c, d, e, _) in enumerate(omega):
        if min(a, f[i]) != 1 or min(b, c) != 1 or min(d, e) != 1:
            raise BadBandData(f"min conditions fail at position {i + 1}")
    flat = [a for w in omega for a in w]
    for k in range(1, t):
        if t % k == 0 and flat == flat[6 * k:] + flat[:6 * k]:
            raise BadBandData("omega is periodic")
    return omega, f


def generator_matrix_xyz(omega, l: int, lam, base: BaseField | None = None):
    """The lt x 6lt matrix ((xy)^2 E | (yz)^2 E | (xz)^2 E | Tx | Ty | Tz)."""
    if l < 1:
        raise BadBandData("l must be positive")
    omega, f = _check_omega_xyz(omega)
    ring = PolyRing(("x", "y", "z"), base)
    x, y, z = ring["x"], ring["y"], ring["z"]
    lam = ring.const(lam)
    if lam.is_zero():
        raise BadBandData("lambda must be nonzero")
    t = len(omega)
    n = l * t
    zero = ring.zero

    def blockdiag(entry):
        m = [[zero] * n for _ in range(n)]
        for i in range(t):
            e = entry(i)
            for a in range(l):
                m[i * l + a][i * l + a] = e
        return m

    def jordan(i, j, scale):
        # l x l block J_l(lam) (upper) at block position (i, j)
        return {(i * l + a, j * l + a): scale * lam for a in range(l)} | \
               {(i * l + a, j * l + a + 1): scale for a in range(l - 1)}

    sq = [blockdiag(lambda i, e=e: e) for e in ((x * y) ** 2, (y * z) ** 2, (x * z) ** 2)]
    tx = blockdiag(lambda i: x ** (omega[i][0] + 1) * y)
    for i in range(t - 1):
        for a in range(l):
            tx[i * l + a][(i + 1) * l + a] += x ** (f[i + 1] + 1) * z
    for (r, c), v in jordan(t - 1, 0, x ** (f[0] + 1) * z).items():
        tx[r][c] += v
    ty = blockdiag(lambda i: y ** (omega[i][1] + 1) * x + y ** (omega[i][2] + 1) * z)
    tz = blockdiag(lambda i: z ** (omega[i][3] + 1) * y + z ** (omega[i][4] + 1) * x)
    rows = [sum((blk[r] for blk in sq + [tx, ty, tz]), []) for r in range(n)]
    return ring, rows


# ---------------------------------------------------------------------------
# families


@dataclass
class FamilyEmission:
    ring_name: str
    family: str
    params: dict
    ring: PolyRing
    f: object
    generators: list
    matrix: list | None
    partner: list | None = None
    checks: dict = dc_field(default_factory=dict)
    reports: dict = dc_field(default_factory=dict)
    flags: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(v.get("ok", True) for v in self.checks.values() if isinstance(v, dict))

    def to_json(self) -> dict:
        s = self.ring.to_str
        out = {
            "ring": self.ring_name,
            "family": self.family,
            "params": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.params.items()},
            "variables": list(self.ring.names),
            "f": None if self.f is None else s(self.f),
            "generators": [s(g) if not isinstance(g, list) else [s(a) for a in g] for g in self.generators],
            "matrix": None if self.matrix is None else [[s(a) for a in r] for r in self.matrix],
            "ok": self.ok,
            "checks": self.checks,
            "reports": self.reports,
            "flags": self.flags,
        }
        if self.partner is not None:
            out["partner"] = [[s(a) for a in r] for r in self.partner]
        return out


def _attach_det(em: FamilyEmission, expect_s: int | None = None):
    r = det_factor(em.ring, em.matrix, em.f)
    good = r.ok and (expect_s is None or r.s == expect_s)
    em.checks["det"] = {"ok": good, "s": r.s, "unit": em.ring.to_str(r.unit), "det": em.ring.to_str(r.det)}


def _attach_relations(em: FamilyEmission, gens, ideal):
    bad = relation_defects(em.ring, gens, em.matrix, ideal)
    em.checks["relations"] = {"ok": not bad, "bad_columns": bad}


def _nonzero(ring: PolyRing, lam, name="lambda"):
    c = ring.const(lam)
    if c.is_zero():
        raise BadParams(f"{name} must be nonzero")
    return c


def _int_param(params, key, lo=1):
    try:
        v = int(params[key])
    except KeyError as exc:
        raise BadParams(f"missing parameter {key}") from exc
    if v < lo:
        raise BadParams(f"{key} must be >= {lo}")
    return v


def _lam(params) -> Fraction:
    raw = params.get("lam", params.get("lambda"))
    if raw is None:
        raise BadParams("missing parameter lam")
    return Fraction(str(raw))


def _t23_ring(base):
    ring = PolyRing(("x", "y", "z"), base)
    x, y, z = ring["x"], ring["y"], ring["z"]
    return ring, x, y, z, x ** 3 + y ** 2 - x * y * z


def _j_presentation(ring, m, lam):
    """Relations among x^(m+1) and y^m + lam*x^(m-1)*(xz - y).

    In the normalization k[[u, v]] (x = uv, y = xu, z = u + v) the second
    generator is x^m (P + Q u) with P, Q in k[x, z]; the two columns below
    span the relations and their determinant is Q^2 f."""
    x, y, z = ring["x"], ring["y"], ring["z"]
    # u^m = alpha + beta u, using u^2 = z u - x
    alpha, beta = ring.zero, ring.one
    for _ in range(m - 1):
        alpha, beta = -x * beta, alpha + z * beta
    P = alpha + lam * z
    Q = beta - lam
    return [[-x * P - Q * y, -x * Q ** 2 - P ** 2 - z * P * Q],
            [x ** 2, x * (P + z * Q) - Q * y]]


def _family_t23(fid, params, base):
    ring, x, y, z, f = _t23_ring(base)
    if fid == "J" or fid == "I":
        m = _int_param(params, "m")
        lamq = _lam(params)
        lam = _nonzero(ring, lamq)
        if m == 1 and lam == ring.one:
            raise BadParams("m = 1 needs lambda != 1")
        if fid == "J":
            gens = [x ** (m + 1), y ** m + lam * x ** (m - 1) * (x * z - y)]
            mat = _j_presentation(ring, m, lam)
        else:
            # y -> xz - y swaps the two branches and turns J(m, 1/lam) into I(m, lam) / lam
            gens = [x ** (m + 1), y * x ** (m - 1) + lam * (x * z - y) ** m]
            sigma = {"x": x, "y": x * z - y, "z": z}
            mat = [[substitute(ring, a, sigma, ring) for a in r] for r in _j_presentation(ring, m, ring.one / lam)]
            mat[1] = [a / lam for a in mat[1]]
        em = FamilyEmission("T23", fid, {"m": m, "lam": lamq}, ring, f, gens, mat)
        _attach_det(em, 1)
        _attach_relations(em, gens, [f])
        return em
    if fid == "M11":
        lamq = _lam(params)
        if lamq in (0, 1):
            raise BadParams("lambda must differ from 0 and 1")
        mu = lamq / (lamq - 1)
        mu_ = ring.const(mu)
        gens = [x ** 2, y + mu_ * x * z]
        mat = [[x + mu_ * (mu_ + 1) * z ** 2, y + mu_ * x * z],
               [y - (mu_ + 1) * x * z, -x ** 2]]
        em = FamilyEmission("T23", fid, {"lam": lamq, "mu": mu}, ring, f, gens, mat)
        _attach_det(em, 1)
        em.checks["det_is_minus_f"] = {"ok": determinant(ring, mat) == -f}
        return em
    if fid == "M21":
        lamq = _lam(params)
        lam = _nonzero(ring, lamq)
        g2 = y * (z - lam) + lam * x * z
        gens = [x ** 2, g2]
        first = [x * (z - lam) ** 2 + lam * z ** 3, y * (z - lam) - x * z ** 2]
        printed = [[first[0], y * (z - lam) - lam * x * z], [first[1], x ** 2]]
        # second column: the Koszul relation (-g2, x^2)
        mat = [[first[0], -g2], [first[1], x ** 2]]
        em = FamilyEmission("T23", fid, {"lam": lamq}, ring, f, gens, mat)
        _attach_det(em, 1)
        _attach_relations(em, gens, [f])
        pr = det_factor(ring, printed, f)
        bad = relation_defects(ring, gens, printed, [f])
        em.reports["printed_matrix"] = {
            "matrix": [[ring.to_str(a) for a in r] for r in printed],
            "s": pr.s, "det_ok": pr.ok, "bad_columns": bad}
        if bad or not pr.ok:
            em.flags.append(f"printed presentation: columns {bad} are not relations; emitted with the y(z-lam) sign flipped in column 2")
        return em
    if fid == "fundamental":
        gens = [[x, ring.zero], [ring.zero, -x ** 2], [-y, x * y], [ring.zero, x * y]]
        w = y * z - x ** 2
        mat = [[y, z, x, ring.zero],
               [ring.zero, y, ring.zero, x],
               [w, ring.zero, y, -z],
               [ring.zero, w, ring.zero, y]]
        em = FamilyEmission("T23", fid, {}, ring, f, gens, mat)
        _attach_det(em, 2)
        em.partner = mf_partner(ring, mat, f)
        em.checks["mf_partner"] = {"ok": em.partner is not None and verify_mf(ring, mat, em.partner, f).ok}
        return em
    if fid == "conductor":
        phi = [[x, y], [-y, x ** 2 - y * z]]
        psi = [[x, -y], [y, x ** 2 - y * z]]
        em = FamilyEmission("T23", fid, {}, ring, f, [x, y], phi, partner=psi)
        _attach_det(em, 1)
        printed = verify_mf(ring, phi, psi, f)
        adj = verify_mf(ring, phi, adjugate(ring, phi), f)
        # the printed partner is reported as is, not corrected
        em.reports["printed_pair"] = printed.to_json()
        em.checks["adjugate_pair"] = adj.to_json()
        if not printed.ok:
            em.flags.append("printed conductor pair does not multiply to f*I; its adjugate partner does")
        return em
    raise BadFamily(f"unknown T23 family {fid!r}; expected I, J, M11, M21, fundamental, conductor")


def _perm_vars(ring, params):
    perm = str(params.get("perm", "xyz"))
    if sorted(perm) != ["x", "y", "z"]:
        raise BadParams("perm must be a permutation of xyz")
    return ring[perm[0]], ring[perm[1]], ring[perm[2]], perm


def _family_xyz(fid, params, base):
    ring = PolyRing(("x", "y", "z"), base)
    x, y, z = ring["x"], ring["y"], ring["z"]
    f = x * y * z
    if fid in ("theta1", "theta2", "theta3", "theta2_printed"):
        p, q = _int_param(params, "p"), _int_param(params, "q")
        lamq = _lam(params)
        lam = _nonzero(ring, lamq)
        u, v, w, perm = _perm_vars(ring, params)
        if fid == "theta2":
            mat = [[lam * u + v ** p * w ** q, w ** (q + 1)], [v ** (p + 1), v * w]]
        elif fid == "theta2_printed":
            mat = [[lam * u + v ** p * w ** q, w ** (q + 1)], [u ** (q + 1), v * w]]
        else:
            mat = [[u, ring.zero], [v ** p + lam * w ** q, v * w]]
            if fid == "theta3":
                mat = transpose(mat)
        em = FamilyEmission("XYZ", fid, {"p": p, "q": q, "lam": lamq, "perm": perm}, ring, f, [], mat)
        _attach_det(em, 1)
        return em
    if fid in ("theta4", "theta5", "theta6", "theta7"):
        m, n, l = (_int_param(params, k) for k in ("m", "n", "l"))
        lamq = _lam(params)
        lam = _nonzero(ring, lamq)
        u, v, w, perm = _perm_vars(ring, params)
        zero = ring.zero
        if fid in ("theta4", "theta6"):
            mat = [[u, w ** l, zero], [zero, v, u ** m], [lam * v ** n, zero, w]]
        else:
            mat = [[u, w ** l, lam * v ** n], [zero, v, u ** m], [zero, zero, w]]
        if fid in ("theta6", "theta7"):
            mat = transpose(mat)
        em = FamilyEmission("XYZ", fid, {"m": m, "n": n, "l": l, "lam": lamq, "perm": perm}, ring, f, [], mat)
        _attach_det(em, 1)
        return em
    if fid == "rank1":
        omega = [int(a) for a in str(params.get("omega", "1,1,1,1,1,1")).replace("(", "").replace(")", "").split(",")]
        if len(omega) != 6:
            raise BadParams("omega needs six integers m1,m2,n1,n2,l1,l2")
        m1, m2, n1, n2, l1, l2 = omega
        if min(m1, m2) != 1 or min(n1, n2) != 1 or min(l1, l2) != 1:
            raise BadParams("each pair in omega needs minimum 1")
        lamq = _lam(params)
        lam = _nonzero(ring, lamq)
        gens = [(x * y) ** 2, (y * z) ** 2, (x * z) ** 2,
                x ** (m1 + 1) * y + lam * x ** (m2 + 1) * z,
                y ** (n1 + 1) * z + y ** (n2 + 1) * x,
                z ** (l1 + 1) * x + z ** (l2 + 1) * y]
        return FamilyEmission("XYZ", fid, {"omega": omega, "lam": lamq}, ring, f, gens, None)
    if fid == "band":
        raw = str(params.get("omega", "1,1,1,1,1,1")).replace("(", "").replace(")", "")
        flat = [int(a) for a in raw.split(",")]
        if len(flat) % 6:
            raise BadParams("omega needs a multiple of six integers")
        omega = [flat[i:i + 6] for i in range(0, len(flat), 6)]
        l = _int_param(params, "l") if "l" in params else 1
        lamq = _lam(params)
        try:
            ring2, rows = generator_matrix_xyz(omega, l, lamq, base)
        except BadBandData as exc:
            raise BadParams(str(exc)) from exc
        em = FamilyEmission("XYZ", fid, {"omega": flat, "l": l, "lam": lamq}, ring2, f, [], rows)
        em.checks["shape"] = {"ok": len(rows) == l * len(omega) and all(len(r) == 6 * l * len(omega) for r in rows)}
        return em
    raise BadFamily(f"unknown XYZ family {fid!r}")


def _family_xyuv(fid, params, base):
    if fid != "rank1":
        raise BadFamily(f"unknown XYUV family {fid!r}; expected rank1")
    ring = PolyRing(("x", "y", "u", "v"), base)
    x, y, u, v = (ring[c] for c in "xyuv")
    m, n, p, q = (_int_param(params, k) for k in ("m", "n", "p", "q"))
    lamq = _lam(params)
    lam = _nonzero(ring, lamq)
    gens = [x ** 2 * u + lam * x ** (m + 1) * v,
            u ** 2 * y + u ** (n + 1) * x,
            y ** 2 * v + y ** (p + 1) * u,
            v ** 2 * x + v ** (q + 1) * y]
    zero = ring.zero
    mat = [[y, zero, zero, zero, zero, v, u ** n, zero, zero],
           [zero, v, zero, zero, zero, zero, x, y ** p, zero],
           [zero, zero, x, zero, zero, zero, zero, u, v ** q],
           [zero, zero, zero, u, zero, lam * x ** m, zero, zero, y]]
    em = FamilyEmission("XYUV", fid, {"m": m, "n": n, "p": p, "q": q, "lam": lamq}, ring, None, gens, mat)
    ncols = len(mat[0])
    zero_cols = [j for j in range(ncols) if all(r[j].is_zero() for r in mat)]
    em.flags.append(f"arity mismatch: the map is stated from A^8 but the matrix has {ncols} columns"
                    f" (zero columns: {zero_cols})")
    em.reports["arity"] = {"declared_source_rank": 8, "columns": ncols, "zero_columns": zero_cols,
                           "mismatch": ncols != 8}
    bad = relation_defects(ring, gens, mat, [x * y, u * v])
    em.reports["relations"] = {"ok": not bad, "bad_columns": bad}
    if bad:
        em.flags.append(f"columns {bad} are not relations modulo (xy, uv)")
    return em


def family(ring_name: str, fid: str, params: dict | None = None, base: BaseField | None = None) -> FamilyEmission:
    params = dict(params or {})
    key = ring_name.upper()
    if key == "T23":
        return _family_t23(fid, params, base)
    if key == "XYZ":
        return _family_xyz(fid, params, base)
    if key == "XYUV":
        return _family_xyuv(fid, params, base)
    raise BadFamily(f"unknown ring {ring_name!r}; expected T23, XYZ or XYUV")


def dirac_pair(base: BaseField):
    """phi = [[x, y - i z], [y + i z, -x]] with phi^2 = (x^2 + y^2 + z^2) I."""
    ring = PolyRing(("x", "y", "z"), base)
    r = ring.sqrt_minus_one()
    if r is None:
        raise BadParams("the Dirac pair needs F_p with p = 1 mod 4")
    x, y, z = ring["x"], ring["y"], ring["z"]
    i = ring.const(r)
    phi = [[x, y - i * z], [y + i * z, -x]]
    return ring, phi, x ** 2 + y ** 2 + z ** 2


def parse_mf(data: dict, base: BaseField | None = None):
    """(ring, phi, psi, f) from {"phi": [[...]], "psi": [[...]], "f": "..."}."""
    try:
        phi_t, psi_t, f_t = data["phi"], data["psi"], data["f"]
    except (KeyError, TypeError) as exc:
        raise PolyParseError("mf input needs keys phi, psi and f") from exc
    texts = [a for r in phi_t for a in r] + [a for r in psi_t for a in r] + [f_t]
    ring = infer_ring(texts, base)
    phi = [[ring.parse(a) for a in r] for r in phi_t]
    psi = [[ring.parse(a) for a in r] for r in psi_t]
    return ring, phi, psi, ring.parse(f_t)
