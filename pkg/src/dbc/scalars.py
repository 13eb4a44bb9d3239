"""Exact scalars: the base field k (rationals or F_p) and the valued field K = k(z).

Elements of K are reduced fractions n(z)/d(z) with d monic.  The valuation is
the order of vanishing at z = 0, so D = {a : valuation(a) >= 0} is the local
ring k[z]_(z), a dense subring of the power series ring k[[z]].

Polynomial arithmetic is delegated to python-flint (nmod_poly / fmpq_poly).
"""

from __future__ import annotations

import ast
import math
from functools import lru_cache

import flint

INF = math.inf


class DivisionByZero(ZeroDivisionError):
    pass


class NotInValuationRing(ValueError):
    pass


class ParseError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class BaseField:
    """The residue field k.  ``p=None`` gives the rationals, otherwise F_p."""

    def __init__(self, p: int | None = None):
        if p is not None:
            if not _is_prime(p) or p < 3:
                raise ValueError(f"F_p needs a prime p >= 3, got {p}")
        self.p = p
        if p is None:
            self._scalar = flint.fmpq
            self._poly = flint.fmpq_poly
        else:
            self._scalar = lambda a, b=1: flint.nmod(a, p) / flint.nmod(b, p)
            self._poly = lambda coeffs: flint.nmod_poly(coeffs, p)
        self.zero = self(0)
        self.one = self(1)

    # -- construction ---------------------------------------------------
    def __call__(self, value, den: int = 1):
        if self.p is None:
            if isinstance(value, flint.fmpq):
                return value / den if den != 1 else value
            return flint.fmpq(value, den) if isinstance(value, int) else flint.fmpq(value) / den
        if isinstance(value, flint.nmod):
            return value / den if den != 1 else value
        if isinstance(value, flint.fmpq):
            return self(int(value.p), int(value.q) * den)
        if den % self.p == 0:
            raise DivisionByZero(f"{den} is zero in F_{self.p}")
        return self._scalar(value, den)

    def is_zero(self, a) -> bool:
        return a == 0

    def poly(self, coeffs):
        """Univariate polynomial over k from a low-to-high coefficient list."""
        return self._poly([self(c) if isinstance(c, int) else c for c in coeffs])

    def to_int_pair(self, a) -> tuple[int, int]:
        if self.p is None:
            return int(a.p), int(a.q)
        return int(a), 1

    def scalar_str(self, a) -> str:
        num, den = self.to_int_pair(a)
        if self.p is not None and num > self.p // 2:
            num -= self.p
        return str(num) if den == 1 else f"{num}/{den}"

    def parse_scalar(self, text: str):
        text = text.strip()
        try:
            if "/" in text:
                a, b = text.split("/")
                return self(int(a), int(b))
            return self(int(text))
        except ValueError as exc:
            raise ParseError(f"not a scalar: {text!r}") from exc

    @property
    def name(self) -> str:
        return "Q" if self.p is None else f"Fp:{self.p}"

    def __repr__(self):
        return f"BaseField({self.name})"

    def __eq__(self, other):
        return isinstance(other, BaseField) and other.p == self.p

    def __hash__(self):
        return hash(("BaseField", self.p))

    @staticmethod
    def from_spec(spec: str) -> "BaseField":
        """Parse ``Q`` or ``Fp:<p>``."""
        spec = spec.strip()
        if spec in ("Q", "QQ"):
            return rationals()
        if spec.startswith("Fp:"):
            return prime_field(int(spec[3:]))
        raise ValueError(f"unknown field {spec!r}; expected Q or Fp:<p>")


@lru_cache(maxsize=None)
def rationals() -> BaseField:
    return BaseField(None)


@lru_cache(maxsize=None)
def prime_field(p: int = 101) -> BaseField:
    return BaseField(p)


def _poly_valuation(f) -> int:
    """Order of vanishing at 0 of a nonzero flint polynomial."""
    v = 0
    while f[v] == 0:
        v += 1
    return v


class FunctionField:
    """K = k(z) with the z-adic valuation."""

    def __init__(self, base: BaseField):
        self.base = base
        self._one_poly = base.poly([1])
        self._zero_poly = base.poly([])
        self.zero = RationalFunction(self, self._zero_poly, self._one_poly)
        self.one = RationalFunction(self, self._one_poly, self._one_poly)
        self.z = RationalFunction(self, base.poly([0, 1]), self._one_poly)

    def __call__(self, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            if value.field is not self:
                raise ValueError("element belongs to a different field")
            return value
        if isinstance(value, str):
            return self.parse(value)
        return RationalFunction(self, self.base.poly([self.base(value)]), self._one_poly)

    def is_zero(self, a) -> bool:
        return a.num.is_zero()

    def from_polys(self, num, den=None) -> "RationalFunction":
        if den is None:
            return RationalFunction(self, num, self._one_poly)
        return RationalFunction.normalized(self, num, den)

    def monomial(self, coeff, exponent: int) -> "RationalFunction":
        """coeff * z^exponent (exponent may be negative)."""
        c = self.base(coeff) if not isinstance(coeff, (flint.fmpq, flint.nmod)) else coeff
        if c == 0:
            return self.zero
        if exponent >= 0:
            return RationalFunction(self, self.base.poly([0] * exponent + [c]), self._one_poly)
        return RationalFunction(self, self.base.poly([c]), self.base.poly([0] * (-exponent) + [1]))

    def parse(self, text: str) -> "RationalFunction":
        """Parse the text syntax, e.g. ``(1+2*z)/(z^2)`` or ``-2/5``."""
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ParseError(f"cannot parse {text!r}") from exc
        return self._eval(tree.body, text)

    def _eval(self, node, text):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return self(node.value)
        if isinstance(node, ast.Name) and node.id == "z":
            return self.z
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            val = self._eval(node.operand, text)
            return -val if isinstance(node.op, ast.USub) else val
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)):
                    exp = node.right
                    if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub) and isinstance(exp.operand, ast.Constant):
                        return self._eval(node.left, text) ** (-exp.operand.value)
                    raise ParseError(f"exponent must be an integer literal in {text!r}")
                return self._eval(node.left, text) ** node.right.value
            left = self._eval(node.left, text)
            right = self._eval(node.right, text)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
        raise ParseError(f"unsupported syntax in {text!r}")

    def __repr__(self):
        return f"FunctionField({self.base.name})"


@lru_cache(maxsize=None)
def function_field(base: BaseField) -> FunctionField:
    return FunctionField(base)


class RationalFunction:
    """An element n/d of k(z); d is monic and coprime to n."""

    __slots__ = ("field", "num", "den", "_val")

    def __init__(self, field: FunctionField, num, den):
        self.field = field
        self.num = num
        self.den = den
        self._val = None

    @staticmethod
    def normalized(field: FunctionField, num, den) -> "RationalFunction":
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if num.is_zero():
            return field.zero
        if den.degree() > 0:
            g = num.gcd(den)
            if not g.is_one():
                num = num // g
                den = den // g
        lc = den.leading_coefficient()
        if lc != 1:
            inv = 1 / lc
            num = num * inv
            den = den * inv
        return RationalFunction(field, num, den)

    # -- structure --------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def valuation(self):
        """z-adic valuation; INF for zero."""
        if self._val is None:
            if self.num.is_zero():
                self._val = INF
            else:
                self._val = _poly_valuation(self.num) - (_poly_valuation(self.den) if self.den.degree() > 0 else 0)
        return self._val

    def residue(self):
        """Image in k = D/zD."""
        v = self.valuation()
        if v < 0:
            raise NotInValuationRing(f"{self} has valuation {v}")
        if v > 0:
            return self.field.base.zero
        return self.num[0] / self.den[0]

    def unit_part(self) -> "RationalFunction":
        """u with self = z^valuation * u and u(0) != 0."""
        v = self.valuation()
        if v == INF:
            raise DivisionByZero("zero has no unit part")
        return self * self.field.monomial(1, -v)

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def constant_value(self):
        """The scalar if this element is constant, else None."""
        if self.den.is_one() and self.num.degree() <= 0:
            return self.num[0]
        return None

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        return self.field(other)

    def __add__(self, other):
        other = self._coerce(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den.is_one() and other.den.is_one():
            return RationalFunction(self.field, self.num + other.num, self.den)
        if self.den == other.den:
            return RationalFunction.normalized(self.field, self.num + other.num, self.den)
        return RationalFunction.normalized(
            self.field, self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(self.field, -self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.num.is_zero() or other.num.is_zero():
            return self.field.zero
        if self.den.is_one() and other.den.is_one():
            return RationalFunction(self.field, self.num * other.num, self.den)
        return RationalFunction.normalized(self.field, self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.num.is_zero():
            raise DivisionByZero("division by zero in k(z)")
        return RationalFunction.normalized(self.field, self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def inverse(self):
        return self.field.one / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, flint.fmpq, flint.nmod)):
            return self.den.is_one() and self.num == self.field.base.poly([self.field.base(other)])
        return NotImplemented

    def __hash__(self):
        return hash((tuple(int(c) if not hasattr(c, "q") else (int(c.p), int(c.q)) for c in self.num.coeffs()),
                     tuple(int(c) if not hasattr(c, "q") else (int(c.p), int(c.q)) for c in self.den.coeffs())))

    # -- text -------------------------------------------------------------
    def _poly_str(self, f) -> str:
        base = self.field.base
        terms = []
        for i, c in enumerate(f.coeffs()):
            if c == 0:
                continue
            s = base.scalar_str(c)
            if i == 0:
                terms.append(s)
                continue
            mono = "z" if i == 1 else f"z^{i}"
            if s == "1":
                terms.append(mono)
            elif s == "-1":
                terms.append("-" + mono)
            else:
                terms.append(f"{s}*{mono}" if "/" not in s else f"({s})*{mono}")
        if not terms:
            return "0"
        out = terms[0]
        for t in terms[1:]:
            out += t if t.startswith("-") else "+" + t
        return out

    def __str__(self):
        if self.num.is_zero():
            return "0"
        n = self._poly_str(self.num)
        if self.den.is_one():
            return n
        d = self._poly_str(self.den)
        return f"({n})/({d})"

    def __repr__(self):
        return f"RationalFunction({self})"
