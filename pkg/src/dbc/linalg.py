"""Dense exact matrices over k, K = k(z) and its valuation ring D.

A ``Matrix`` carries the ring its entries live in: either a ``BaseField``
(residue matrices) or a ``FunctionField``.  Everything here is written against
the small interface both rings share (``zero``, ``one``, ``is_zero``, calling
the ring to coerce an int), so the same elimination code serves k and K.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scalars import INF, BaseField, FunctionField, NotInValuationRing, ParseError


class NotSquare(ValueError):
    pass


class NotOverD(ValueError):
    pass


class NotInvertible(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class ReduciblePolynomial(ValueError):
    pass


class PhiEqualsT(ValueError):
    pass


class Matrix:
    """Immutable rectangular matrix; ``rows`` is a tuple of tuples."""

    __slots__ = ("ring", "nrows", "ncols", "rows")

    def __init__(self, ring, rows, nrows: int | None = None, ncols: int | None = None):
        rows = tuple(tuple(r) for r in rows)
        if nrows is None:
            nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if len(rows) != nrows or any(len(r) != ncols for r in rows):
            raise ShapeMismatch("ragged matrix rows")
        self.ring = ring
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows

    # -- constructors -----------------------------------------------------
    @classmethod
    def of(cls, ring, rows, ncols: int | None = None) -> "Matrix":
        """Coerce ints, strings and scalars into ``ring``."""
        conv = []
        for r in rows:
            conv.append([_coerce(ring, a) for a in r])
        return cls(ring, conv, len(conv), ncols if ncols is not None else (len(conv[0]) if conv else 0))

    @classmethod
    def zeros(cls, ring, nrows: int, ncols: int) -> "Matrix":
        z = ring.zero
        return cls(ring, [[z] * ncols for _ in range(nrows)], nrows, ncols)

    @classmethod
    def identity(cls, ring, n: int) -> "Matrix":
        z, o = ring.zero, ring.one
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def scalar(cls, ring, n: int, value) -> "Matrix":
        value = _coerce(ring, value)
        z = ring.zero
        return cls(ring, [[value if i == j else z for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, ring, columns, nrows: int) -> "Matrix":
        return cls(ring, [[c[i] for c in columns] for i in range(nrows)], nrows, len(columns))

    # -- access -----------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, key):
        i, j = key
        return self.rows[i][j]

    def column(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_zero(self) -> bool:
        iz = self.ring.is_zero
        return all(iz(a) for r in self.rows for a in r)

    def submatrix(self, rows, cols) -> "Matrix":
        rows = list(rows)
        cols = list(cols)
        return Matrix(self.ring, [[self.rows[i][j] for j in cols] for i in rows], len(rows), len(cols))

    def transpose(self) -> "Matrix":
        return Matrix(self.ring, [[self.rows[i][j] for i in range(self.nrows)] for j in range(self.ncols)],
                      self.ncols, self.nrows)

    T = property(transpose)

    def map(self, fn, ring=None) -> "Matrix":
        return Matrix(ring or self.ring, [[fn(a) for a in r] for r in self.rows], self.nrows, self.ncols)

    def tolist(self) -> list[list]:
        return [list(r) for r in self.rows]

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: "Matrix") -> "Matrix":
        _same_shape(self, other)
        return Matrix(self.ring, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                      self.nrows, self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        _same_shape(self, other)
        return Matrix(self.ring, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                      self.nrows, self.ncols)

    def __neg__(self) -> "Matrix":
        return self.map(lambda a: -a)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return matmul(self, other)
        c = _coerce(self.ring, other)
        return self.map(lambda a: a * c)

    def __rmul__(self, other):
        c = _coerce(self.ring, other)
        return self.map(lambda a: c * a)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return matmul(self, other)

    def __pow__(self, n: int) -> "Matrix":
        if not self.is_square():
            raise NotSquare("power of a non-square matrix")
        result = Matrix.identity(self.ring, self.nrows)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return all(a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s))

    def __hash__(self):
        return hash((self.nrows, self.ncols, self.rows))

    # -- valuation-ring structure ------------------------------------------
    def valuation(self):
        return matrix_valuation(self)

    def residue(self) -> "Matrix":
        """Entrywise image in k; requires all entries in D."""
        if not isinstance(self.ring, FunctionField):
            return self
        return self.map(lambda a: a.residue(), self.ring.base)

    def lift(self, field: FunctionField) -> "Matrix":
        """Constant lift of a matrix over k into K."""
        if isinstance(self.ring, FunctionField):
            return self
        return self.map(field, field)

    def shift(self, k: int) -> "Matrix":
        """Multiply every entry by z^k."""
        zk = self.ring.monomial(1, k)
        return self.map(lambda a: a * zk)

    # -- text -------------------------------------------------------------
    def to_json(self) -> list[list[str]]:
        to_s = (lambda a: self.ring.scalar_str(a)) if isinstance(self.ring, BaseField) else str
        return [[to_s(a) for a in r] for r in self.rows]

    @classmethod
    def from_json(cls, ring, data, nrows: int | None = None, ncols: int | None = None) -> "Matrix":
        if not data and nrows is not None:
            return cls.zeros(ring, nrows, ncols or 0)
        m = cls.of(ring, data)
        if nrows is not None and (m.nrows, m.ncols) != (nrows, ncols) and not (m.nrows == 0 and nrows == 0):
            raise ShapeMismatch(f"expected {nrows}x{ncols}, got {m.nrows}x{m.ncols}")
        if m.nrows == 0 and ncols:
            return cls.zeros(ring, 0, ncols)
        return m

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(s for s in r) + "]" for r in self.to_json()) + "]"

    __repr__ = __str__


def _coerce(ring, a):
    if isinstance(a, str):
        if isinstance(ring, FunctionField):
            return ring.parse(a)
        return ring.parse_scalar(a)
    if isinstance(ring, FunctionField):
        return ring(a)
    return a if not isinstance(a, int) else ring(a)


def _same_shape(a: Matrix, b: Matrix):
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.ncols != b.nrows:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    ring = a.ring
    iz = ring.is_zero
    zero = ring.zero
    bcols = [b.column(j) for j in range(b.ncols)]
    out = []
    for r in a.rows:
        nz = [(k, x) for k, x in enumerate(r) if not iz(x)]
        row = []
        for col in bcols:
            acc = zero
            for k, x in nz:
                y = col[k]
                if not iz(y):
                    acc = acc + x * y
            row.append(acc)
        out.append(row)
    return Matrix(ring, out, a.nrows, b.ncols)


def hstack(ring, *blocks: Matrix) -> Matrix:
    blocks = [b for b in blocks if b is not None]
    if not blocks:
        return Matrix(ring, [], 0, 0)
    n = blocks[0].nrows
    if any(b.nrows != n for b in blocks):
        raise ShapeMismatch("hstack row counts differ")
    return Matrix(ring, [sum((list(b.rows[i]) for b in blocks), []) for i in range(n)], n,
                  sum(b.ncols for b in blocks))


def vstack(ring, *blocks: Matrix) -> Matrix:
    blocks = [b for b in blocks if b is not None]
    if not blocks:
        return Matrix(ring, [], 0, 0)
    n = blocks[0].ncols
    if any(b.ncols != n for b in blocks):
        raise ShapeMismatch("vstack column counts differ")
    return Matrix(ring, [r for b in blocks for r in b.rows], sum(b.nrows for b in blocks), n)


def block_diag(ring, *blocks: Matrix) -> Matrix:
    nr = sum(b.nrows for b in blocks)
    nc = sum(b.ncols for b in blocks)
    out = [[ring.zero] * nc for _ in range(nr)]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.nrows):
            out[r0 + i][c0:c0 + b.ncols] = b.rows[i]
        r0 += b.nrows
        c0 += b.ncols
    return Matrix(ring, out, nr, nc)


# ---------------------------------------------------------------------------
# valuations and invertibility over D


def matrix_valuation(m: Matrix):
    """min of the entry valuations; INF for zero or empty matrices."""
    best = INF
    for r in m.rows:
        for a in r:
            v = a.valuation()
            if v < best:
                best = v
    return best


def is_D_invertible(m: Matrix) -> bool:
    if not m.is_square():
        raise NotSquare(f"{m.shape} is not square")
    if m.nrows == 0:
        return True
    if matrix_valuation(m) < 0:
        return False
    return rank(m.residue()) == m.nrows


# ---------------------------------------------------------------------------
# Gaussian elimination over a field


def _rref_rows(ring, rows: list[list], ncols: int, track: list[list] | None = None):
    """In-place reduced row echelon form; returns pivot columns.

    If ``track`` is given the same row operations are applied to it, so that
    ``track`` ends up as T with T * original = result.
    """
    iz = ring.is_zero
    pivots = []
    r = 0
    n = len(rows)
    for c in range(ncols):
        if r == n:
            break
        p = next((i for i in range(r, n) if not iz(rows[i][c])), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
            if track is not None:
                track[r], track[p] = track[p], track[r]
        inv = ring.one / rows[r][c]
        rows[r] = [a * inv for a in rows[r]]
        if track is not None:
            track[r] = [a * inv for a in track[r]]
        for i in range(n):
            if i != r and not iz(rows[i][c]):
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                if track is not None:
                    track[i] = [a - f * b for a, b in zip(track[i], track[r])]
        pivots.append(c)
        r += 1
    return pivots


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    rows = [list(r) for r in m.rows]
    piv = _rref_rows(m.ring, rows, m.ncols)
    return Matrix(m.ring, rows, m.nrows, m.ncols), piv


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def inverse(m: Matrix) -> Matrix:
    if not m.is_square():
        raise NotSquare(f"{m.shape} is not square")
    n = m.nrows
    rows = [list(r) for r in m.rows]
    track = [list(r) for r in Matrix.identity(m.ring, n).rows]
    piv = _rref_rows(m.ring, rows, n, track)
    if len(piv) != n:
        raise NotInvertible("singular matrix")
    return Matrix(m.ring, track, n, n)


def D_inverse(m: Matrix) -> Matrix:
    """Inverse of a D-invertible matrix (entries of the result lie in D)."""
    if not is_D_invertible(m):
        raise NotInvertible("matrix is not invertible over D")
    return inverse(m)


def determinant(m: Matrix):
    if not m.is_square():
        raise NotSquare(f"{m.shape} is not square")
    ring = m.ring
    iz = ring.is_zero
    rows = [list(r) for r in m.rows]
    n = m.nrows
    det = ring.one
    for c in range(n):
        p = next((i for i in range(c, n) if not iz(rows[i][c])), None)
        if p is None:
            return ring.zero
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            det = -det
        piv = rows[c][c]
        det = det * piv
        inv = ring.one / piv
        for i in range(c + 1, n):
            if not iz(rows[i][c]):
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return det


def kernel(m: Matrix) -> list[list]:
    """Basis of the right null space, as a list of column vectors."""
    ring = m.ring
    r, piv = rref(m)
    free = [j for j in range(m.ncols) if j not in piv]
    basis = []
    for f in free:
        v = [ring.zero] * m.ncols
        v[f] = ring.one
        for i, pc in enumerate(piv):
            v[pc] = -r.rows[i][f]
        basis.append(v)
    return basis


def column_space(m: Matrix) -> list[list]:
    """A basis of the column space chosen among the columns of ``m``."""
    _, piv = rref(m)
    return [m.column(j) for j in piv]


def extend_to_basis(ring, vectors: list[list], n: int) -> list[list]:
    """Extend independent vectors to a basis of ring^n with unit vectors."""
    out = list(vectors)
    for j in range(n):
        if len(out) == n:
            break
        e = [ring.one if i == j else ring.zero for i in range(n)]
        if rank(Matrix.from_columns(ring, out + [e], n)) == len(out) + 1:
            out.append(e)
    return out


def mat_vec(m: Matrix, v: list) -> list:
    ring = m.ring
    iz = ring.is_zero
    out = []
    for r in m.rows:
        acc = ring.zero
        for a, b in zip(r, v):
            if not iz(a) and not iz(b):
                acc = acc + a * b
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# polynomials in t, stored as coefficient tuples (low to high) over a ring


def tpoly_trim(ring, coeffs) -> tuple:
    coeffs = list(coeffs)
    while coeffs and ring.is_zero(coeffs[-1]):
        coeffs.pop()
    return tuple(coeffs)


def tpoly_mul(ring, a, b) -> tuple:
    if not a or not b:
        return ()
    out = [ring.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return tpoly_trim(ring, out)


def tpoly_pow(ring, a, m: int) -> tuple:
    out = (ring.one,)
    for _ in range(m):
        out = tpoly_mul(ring, out, a)
    return out


def tpoly_reverse_monic(ring, a) -> tuple:
    """t^r a(1/t) scaled to be monic (requires a(0) != 0)."""
    rev = tuple(reversed(a))
    lead = rev[-1]
    return tuple(c / lead for c in rev)


def tpoly_str(ring, a) -> str:
    """Text form such as ``t^2-2*t+1``; coefficients in K are parenthesised."""
    if not a:
        return "0"
    terms = []
    for i in range(len(a) - 1, -1, -1):
        c = a[i]
        if ring.is_zero(c):
            continue
        cs = ring.scalar_str(c) if isinstance(ring, BaseField) else str(c)
        mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
        if isinstance(ring, FunctionField) and not _is_simple_number(cs):
            cs = f"({cs})"
        if mono == "":
            term = cs
        elif cs == "1":
            term = mono
        elif cs == "-1":
            term = "-" + mono
        else:
            term = f"{cs}*{mono}"
        terms.append(term)
    out = terms[0]
    for t in terms[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


def _is_simple_number(s: str) -> bool:
    body = s[1:] if s.startswith("-") else s
    return body.replace("/", "").isdigit()


def tpoly_parse(ring, text: str) -> tuple:
    """Parse a polynomial in ``t`` whose coefficients may involve ``z``."""
    import ast

    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse polynomial {text!r}") from exc

    def ev(node) -> tuple:
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return tpoly_trim(ring, (ring(node.value),))
        if isinstance(node, ast.Name):
            if node.id == "t":
                return (ring.zero, ring.one)
            if node.id == "z" and isinstance(ring, FunctionField):
                return (ring.z,)
            raise ParseError(f"unknown variable {node.id!r} in {text!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return tuple(-c for c in v) if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)) or node.right.value < 0:
                    raise ParseError(f"bad exponent in {text!r}")
                return tpoly_pow(ring, ev(node.left), node.right.value)
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return _tpoly_add(ring, a, b)
            if isinstance(node.op, ast.Sub):
                return _tpoly_add(ring, a, tuple(-c for c in b))
            if isinstance(node.op, ast.Mult):
                return tpoly_mul(ring, a, b)
            if isinstance(node.op, ast.Div):
                if len(b) != 1:
                    raise ParseError(f"can only divide by constants in {text!r}")
                return tuple(c / b[0] for c in a)
        raise ParseError(f"unsupported syntax in {text!r}")

    return ev(tree.body)


def _tpoly_add(ring, a, b) -> tuple:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else ring.zero) + (b[i] if i < len(b) else ring.zero) for i in range(n)]
    return tpoly_trim(ring, out)


def tpoly_eval_matrix(p, m: Matrix) -> Matrix:
    """p(m) by Horner's rule."""
    ring = m.ring
    out = Matrix.zeros(ring, m.nrows, m.ncols)
    for c in reversed(p):
        out = out @ m + Matrix.scalar(ring, m.nrows, c)
    return out


def _to_flint(base: BaseField, coeffs):
    return base.poly(list(coeffs))


def _from_flint(base: BaseField, f) -> tuple:
    return tpoly_trim(base, [base(c) if isinstance(c, int) else c for c in f.coeffs()])


def factor_tpoly(ring, coeffs) -> list[tuple[tuple, int]]:
    """Monic irreducible factors with multiplicities, over k or over K = k(z)."""
    coeffs = tpoly_trim(ring, coeffs)
    if len(coeffs) <= 1:
        return []
    if isinstance(ring, BaseField):
        _, facs = _to_flint(ring, coeffs).factor()
        out = []
        for f, e in facs:
            g = _from_flint(ring, f)
            lead = g[-1]
            out.append((tuple(c / lead for c in g), int(e)))
        return sorted(out, key=lambda fe: (len(fe[0]), [ring.to_int_pair(c) for c in fe[0]]))
    return _factor_over_function_field(ring, coeffs)


def _mpoly_context(base: BaseField):
    import flint

    if base.p is None:
        return flint.fmpq_mpoly_ctx.get(("z", "t"))
    return flint.nmod_mpoly_ctx.get(("z", "t"), modulus=base.p)


def _factor_over_function_field(field: FunctionField, coeffs) -> list[tuple[tuple, int]]:
    # clear denominators, factor in k[z, t], keep the factors of positive t-degree
    base = field.base
    den = base.poly([1])
    for c in coeffs:
        g = den.gcd(c.den)
        den = den * (c.den // g)
    terms = {}
    for ti, c in enumerate(coeffs):
        num = c.num * (den // c.den)
        for zi, a in enumerate(num.coeffs()):
            if a != 0:
                terms[(zi, ti)] = a
    ctx = _mpoly_context(base)
    _, facs = ctx.from_dict(terms).factor()
    out = []
    for f, e in facs:
        by_t: dict[int, dict[int, object]] = {}
        for (zi, ti), a in f.to_dict().items():
            by_t.setdefault(ti, {})[zi] = a
        tdeg = max(by_t)
        if tdeg == 0:
            continue
        polys = []
        for ti in range(tdeg + 1):
            zc = by_t.get(ti, {})
            top = max(zc) if zc else -1
            polys.append(base.poly([zc.get(i, 0) for i in range(top + 1)]))
        lead = field.from_polys(polys[-1])
        out.append((tuple(field.from_polys(p) / lead for p in polys), int(e)))
    return sorted(out, key=lambda fe: (len(fe[0]), [str(c) for c in fe[0]]))


def is_irreducible_tpoly(ring, coeffs) -> bool:
    facs = factor_tpoly(ring, coeffs)
    return len(facs) == 1 and facs[0][1] == 1


# ---------------------------------------------------------------------------
# companion and Jordan blocks


def companion(ring, coeffs) -> Matrix:
    """Companion matrix of a monic polynomial: ones below the diagonal and
    the negated coefficients in the last column."""
    coeffs = tpoly_trim(ring, coeffs)
    n = len(coeffs) - 1
    if n < 1:
        raise ValueError("companion matrix needs a polynomial of positive degree")
    lead = coeffs[-1]
    if lead != ring.one:
        coeffs = tuple(c / lead for c in coeffs)
    rows = [[ring.zero] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = ring.one
    for i in range(n):
        rows[i][n - 1] = -coeffs[i]
    return Matrix(ring, rows, n, n)


def jordan_block(ring, lam, m: int) -> Matrix:
    """Upper Jordan block: lam on the diagonal, ones just above it."""
    lam = _coerce(ring, lam)
    rows = [[ring.zero] * m for _ in range(m)]
    for i in range(m):
        rows[i][i] = lam
        if i + 1 < m:
            rows[i][i + 1] = ring.one
    return Matrix(ring, rows, m, m)


@dataclass(frozen=True)
class FrobeniusBlock:
    """Data of one band block: phi irreducible, power m, and the matrix used."""

    phi: tuple
    m: int
    mode: str
    matrix: Matrix

    @property
    def size(self) -> int:
        return self.m * (len(self.phi) - 1)


def companion_lift(field: FunctionField, phi, m: int, mode: str) -> FrobeniusBlock:
    """Frobenius block for a band.

    ``decorated``: phi over k.  A linear phi = t - lam gives the Jordan block
    J_m(lam); otherwise the companion matrix of phi^m, both lifted as
    constants into D.  ``plain``: phi over K and the companion matrix of phi^m.
    """
    if mode not in ("decorated", "plain"):
        raise ValueError(f"unknown mode {mode!r}")
    ring = field.base if mode == "decorated" else field
    phi = tpoly_trim(ring, [_coerce(ring, c) for c in phi])
    if len(phi) < 2:
        raise ReduciblePolynomial("phi must have positive degree")
    if phi[-1] != ring.one:
        phi = tuple(c / phi[-1] for c in phi)
    if len(phi) == 2 and ring.is_zero(phi[0]):
        raise PhiEqualsT("phi(t) = t is excluded")
    if m < 1:
        raise ValueError("multiplicity must be positive")
    if not is_irreducible_tpoly(ring, phi):
        raise ReduciblePolynomial(f"{tpoly_str(ring, phi)} is reducible")
    if mode == "decorated":
        if len(phi) == 2:
            mat = jordan_block(ring, -phi[0], m)
        else:
            mat = companion(ring, tpoly_pow(ring, phi, m))
        mat = mat.lift(field)
    else:
        mat = companion(ring, tpoly_pow(ring, phi, m))
    return FrobeniusBlock(phi, m, mode, mat)


# ---------------------------------------------------------------------------
# rational canonical form via the Smith form of tI - M over k[t]


@dataclass(frozen=True)
class CompanionBlock:
    poly: tuple
    matrix: Matrix


def smith_form_tI(m: Matrix):
    """Smith form of tI - M over k[t].

    Returns the diagonal (monic invariant factors, as flint polynomials) and
    U^-1 for the unimodular row transform U with U (tI - M) V = diag.
    """
    base = m.ring
    n = m.nrows
    zero = base.poly([])
    one = base.poly([1])
    t = base.poly([0, 1])
    a = [[(t if i == j else zero) - base.poly([m[i, j]]) for j in range(n)] for i in range(n)]
    uinv = [[one if i == j else zero for j in range(n)] for i in range(n)]

    def col_op(mat, dst, src, q):  # column dst += q * column src
        for row in mat:
            row[dst] = row[dst] + q * row[src]

    for s in range(n):
        while True:
            best = None
            for i in range(s, n):
                for j in range(s, n):
                    if not a[i][j].is_zero() and (best is None or a[i][j].degree() < best[0]):
                        best = (a[i][j].degree(), i, j)
            if best is None:
                break
            _, i, j = best
            if i != s:
                a[s], a[i] = a[i], a[s]
                for row in uinv:
                    row[s], row[i] = row[i], row[s]
            if j != s:
                for row in a:
                    row[s], row[j] = row[j], row[s]
            p = a[s][s]
            dirty = False
            for i in range(s + 1, n):
                if not a[i][s].is_zero():
                    q, r = divmod(a[i][s], p)
                    a[i] = [x - q * y for x, y in zip(a[i], a[s])]
                    col_op(uinv, s, i, q)
                    dirty = dirty or not r.is_zero()
            for j in range(s + 1, n):
                if not a[s][j].is_zero():
                    q, r = divmod(a[s][j], p)
                    for row in a:
                        row[j] = row[j] - q * row[s]
                    dirty = dirty or not r.is_zero()
            if dirty:
                continue
            bad = next(((i, j) for i in range(s + 1, n) for j in range(s + 1, n)
                        if not (a[i][j] % p).is_zero()), None)
            if bad is None:
                break
            i = bad[0]
            a[s] = [x + y for x, y in zip(a[s], a[i])]
            col_op(uinv, i, s, -one)
        if not a[s][s].is_zero():
            lc = a[s][s].leading_coefficient()
            if lc != 1:
                a[s] = [x * (1 / lc) for x in a[s]]
                for row in uinv:
                    row[s] = row[s] * lc
    return [a[i][i] for i in range(n)], uinv


def rational_canonical_form(m: Matrix) -> tuple[Matrix, list[CompanionBlock]]:
    """P and companion blocks with P^-1 M P = diag(blocks), invariant factors
    in divisibility order."""
    if not m.is_square():
        raise NotSquare(f"{m.shape} is not square")
    base = m.ring
    n = m.nrows
    diag, uinv = smith_form_tI(m)
    columns = []
    blocks = []
    for s in range(n):
        f = diag[s]
        if f.degree() < 1:
            continue
        v = [base.zero] * n
        for j in range(n):
            p = uinv[j][s]
            if p.is_zero():
                continue
            # Horner: sum_k c_k M^k e_j
            acc = [base.zero] * n
            for c in reversed(_from_flint(base, p)):
                acc = mat_vec(m, acc)
                acc[j] = acc[j] + c
            v = [x + y for x, y in zip(v, acc)]
        coeffs = _from_flint(base, f)
        for _ in range(len(coeffs) - 1):
            columns.append(v)
            v = mat_vec(m, v)
        blocks.append(CompanionBlock(coeffs, companion(base, coeffs)))
    return Matrix.from_columns(base, columns, n), blocks


def elementary_divisors(m: Matrix) -> list[tuple[tuple, int]]:
    """(phi, e) pairs over k: each invariant factor split into prime powers."""
    out = []
    for blk in rational_canonical_form(m)[1]:
        out.extend(factor_tpoly(m.ring, blk.poly))
    return out


# ---------------------------------------------------------------------------
# characteristic polynomial and elementary divisors over any field


def char_poly(m: Matrix) -> tuple:
    """det(tI - M) via reduction to upper Hessenberg form."""
    ring = m.ring
    iz = ring.is_zero
    n = m.nrows
    h = [list(r) for r in m.rows]
    for j in range(n - 2):
        p = next((i for i in range(j + 1, n) if not iz(h[i][j])), None)
        if p is None:
            continue
        if p != j + 1:
            h[j + 1], h[p] = h[p], h[j + 1]
            for row in h:
                row[j + 1], row[p] = row[p], row[j + 1]
        piv = h[j + 1][j]
        for i in range(j + 2, n):
            if not iz(h[i][j]):
                f = h[i][j] / piv
                h[i] = [a - f * b for a, b in zip(h[i], h[j + 1])]
                for row in h:
                    row[j + 1] = row[j + 1] + f * row[i]
    # recurrence for the leading principal minors of tI - H
    polys = [(ring.one,)]
    for k in range(1, n + 1):
        pk = tpoly_mul(ring, (-h[k - 1][k - 1], ring.one), polys[k - 1])
        prod = ring.one
        for i in range(k - 1, 0, -1):
            prod = prod * h[i][i - 1]
            term = tpoly_mul(ring, (h[i - 1][k - 1] * prod,), polys[i - 1])
            pk = _tpoly_add(ring, pk, tuple(-c for c in term))
        polys.append(pk)
    return polys[n]


def elementary_divisors_ranks(m: Matrix) -> list[tuple[tuple, int]]:
    """Elementary divisors of a square matrix over any field, from the ranks
    of powers of phi(M) for each irreducible factor phi of the char poly."""
    ring = m.ring
    n = m.nrows
    out = []
    for phi, mult in factor_tpoly(ring, char_poly(m)):
        deg = len(phi) - 1
        base_mat = tpoly_eval_matrix(phi, m)
        ranks = [n]
        power = Matrix.identity(ring, n)
        for _ in range(mult):
            power = power @ base_mat
            ranks.append(rank(power))
        # number of blocks of size >= j is (r_{j-1} - r_j) / deg
        at_least = [(ranks[j - 1] - ranks[j]) // deg for j in range(1, mult + 1)] + [0]
        for j in range(1, mult + 1):
            for _ in range(at_least[j - 1] - at_least[j]):
                out.append((phi, j))
    return out


# ---------------------------------------------------------------------------
# Fitting decomposition over D and Jordan chains of nilpotent matrices


def fitting_basis(m: Matrix) -> tuple[Matrix, int]:
    """Constant basis change P with P^-1 M P = diag(nilpotent, invertible)
    over a field; returns (P, size of the invertible part)."""
    n = m.nrows
    power = m ** n if n else m
    nil = kernel(power)
    inv = column_space(power)
    p = Matrix.from_columns(m.ring, nil + inv, n)
    return p, len(inv)


def fitting_split(a: Matrix) -> tuple[Matrix, Matrix, int]:
    """S1, S2 over D with S1 A S2 = diag(A0, A1), residue(A0) nilpotent and
    residue(A1) invertible of size r; S1 = S2^-1 modulo z."""
    if not a.is_square():
        raise NotSquare(f"{a.shape} is not square")
    if matrix_valuation(a) < 0:
        raise NotOverD("fitting_split needs a matrix over D")
    field = a.ring
    n = a.nrows
    if n == 0:
        return a, a, 0
    p, r = fitting_basis(a.residue())
    p = p.lift(field)
    pinv = inverse(p)
    b = pinv @ a @ p
    k = n - r
    if r == 0 or k == 0:
        return pinv, p, r
    b01 = b.submatrix(range(k), range(k, n))
    b10 = b.submatrix(range(k, n), range(k))
    b11inv = inverse(b.submatrix(range(k, n), range(k, n)))
    ident_k = Matrix.identity(field, k)
    ident_r = Matrix.identity(field, r)
    left = vstack(field, hstack(field, ident_k, -(b01 @ b11inv)),
                  hstack(field, Matrix.zeros(field, r, k), ident_r))
    right = vstack(field, hstack(field, ident_k, Matrix.zeros(field, k, r)),
                   hstack(field, -(b11inv @ b10), ident_r))
    return left @ pinv, p @ right, r


def nilpotent_jordan_basis(m: Matrix) -> tuple[Matrix, list[int]]:
    """P with P^-1 N P = diag(J_{k_1}, J_{k_2}, ...) (upper nilpotent Jordan
    blocks, sizes ascending) for nilpotent N over a field."""
    ring = m.ring
    n = m.nrows
    if n == 0:
        return m, []
    kernels = [[]]  # kernels[j] = basis of ker N^j
    power = Matrix.identity(ring, n)
    while len(kernels[-1]) < n:
        power = power @ m
        kernels.append(kernel(power))
        if len(kernels) > n + 1:
            raise ValueError("matrix is not nilpotent")
    top = len(kernels) - 1
    chains: list[tuple[int, list]] = []  # (length, top vector)
    for j in range(top, 0, -1):
        span = list(kernels[j - 1])
        for length, w in chains:
            v = w
            for _ in range(length - j):
                v = mat_vec(m, v)
            span.append(v)
        r = rank(Matrix.from_columns(ring, span, n)) if span else 0
        for b in kernels[j]:
            trial = span + [b]
            r2 = rank(Matrix.from_columns(ring, trial, n))
            if r2 > r:
                span = trial
                r = r2
                chains.append((j, b))
    chains.sort(key=lambda c: c[0])
    columns = []
    sizes = []
    for length, w in chains:
        vecs = [w]
        for _ in range(length - 1):
            vecs.append(mat_vec(m, vecs[-1]))
        columns.extend(reversed(vecs))  # N^{k-1} w, ..., N w, w
        sizes.append(length)
    return Matrix.from_columns(ring, columns, n), sizes


__all__ = [
    "Matrix", "matmul", "hstack", "vstack", "block_diag", "matrix_valuation", "is_D_invertible",
    "rref", "rank", "inverse", "D_inverse", "determinant", "kernel", "column_space", "extend_to_basis",
    "companion", "jordan_block", "companion_lift", "FrobeniusBlock", "CompanionBlock",
    "rational_canonical_form", "smith_form_tI", "elementary_divisors", "elementary_divisors_ranks",
    "char_poly", "fitting_split", "fitting_basis", "nilpotent_jordan_basis", "factor_tpoly",
    "tpoly_str", "tpoly_parse", "tpoly_mul", "tpoly_pow", "tpoly_reverse_monic", "tpoly_trim",
    "NotSquare", "NotOverD", "NotInvertible", "ShapeMismatch", "ReduciblePolynomial", "PhiEqualsT",
    "NotInValuationRing",
]
