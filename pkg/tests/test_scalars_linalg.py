from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from dbc.linalg import (D_inverse, Matrix, NotInvertible, PhiEqualsT, ReduciblePolynomial, block_diag, char_poly,
                        companion, companion_lift, determinant, elementary_divisors, elementary_divisors_ranks,
                        factor_tpoly, inverse, is_D_invertible, kernel, matmul, rank, rational_canonical_form,
                        smith_form_tI, tpoly_mul, tpoly_parse, tpoly_pow, tpoly_reverse_monic, tpoly_str)
from dbc.scalars import BaseField, DivisionByZero, ParseError, function_field, prime_field, rationals

Q = rationals()
KQ = function_field(Q)
F7 = prime_field(7)
K7 = function_field(F7)

small = st.integers(-4, 4)


@st.composite
def laurent(draw, field=KQ, nonzero=False):
    """A short sum of monomials c z^e, optionally divided by a polynomial."""
    terms = draw(st.lists(st.tuples(small, st.integers(-2, 3)), min_size=1, max_size=3))
    a = field.zero
    for c, e in terms:
        a = a + field.monomial(c, e)
    if draw(st.booleans()):
        a = a / (field.one + field.monomial(draw(st.integers(1, 3)), draw(st.integers(1, 2))))
    if nonzero and a.is_zero():
        a = field.one
    return a


@st.composite
def int_matrix(draw, n):
    return [[draw(small) for _ in range(n)] for _ in range(n)]


# -- scalars ----------------------------------------------------------------

def test_field_specs():
    assert BaseField.from_spec("Q") == Q
    assert BaseField.from_spec("Fp:101") == prime_field(101)
    with pytest.raises(ValueError):
        BaseField.from_spec("R")
    with pytest.raises(ValueError):
        prime_field(9)


def test_zero_in_Fp_rejected():
    with pytest.raises(DivisionByZero):
        F7(1, 14)


def test_parse_and_print():
    a = KQ.parse("(1+2*z)/(z^2)")
    assert a.valuation() == -2
    assert str(a.unit_part()) == "1+2*z"
    assert (K7.z * 3 + 1).residue() == F7(1)
    with pytest.raises(ParseError):
        KQ.parse("z^z")


def test_scalar_print_is_symmetric_mod_p():
    assert F7.scalar_str(F7(6)) == "-1"
    assert Q.scalar_str(Q(3, 6)) == "1/2"


@given(laurent(), laurent(), laurent())
def test_field_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a + b) - b == a
    if not b.is_zero():
        assert (a / b) * b == a


@given(laurent(nonzero=True), laurent(nonzero=True))
def test_valuation_is_additive(a, b):
    assert (a * b).valuation() == a.valuation() + b.valuation()
    assert a.inverse().valuation() == -a.valuation()


@given(laurent(nonzero=True))
def test_unit_part_splits_off_z_power(a):
    u = a.unit_part()
    assert u.valuation() == 0
    assert KQ.monomial(1, a.valuation()) * u == a


# -- matrices ---------------------------------------------------------------

def _sym(rows):
    return sympy.Matrix(rows)


@settings(max_examples=40)
@given(st.integers(1, 4).flatmap(int_matrix))
def test_determinant_matches_sympy(rows):
    m = Matrix.of(Q, rows)
    assert determinant(m) == Q(int(_sym(rows).det()))


@settings(max_examples=40)
@given(st.integers(1, 4).flatmap(int_matrix))
def test_char_poly_matches_sympy(rows):
    t = sympy.Symbol("t")
    want = sympy.Poly(_sym(rows).charpoly(t).as_expr(), t).all_coeffs()[::-1]
    got = char_poly(Matrix.of(Q, rows))
    assert [Fraction(int(c.p), int(c.q)) for c in got] == [Fraction(int(c)) for c in want]


@settings(max_examples=30)
@given(st.integers(1, 3).flatmap(int_matrix), st.integers(1, 3).flatmap(int_matrix))
def test_determinant_is_multiplicative(r1, r2):
    n = min(len(r1), len(r2))
    a = Matrix.of(Q, [r[:n] for r in r1[:n]])
    b = Matrix.of(Q, [r[:n] for r in r2[:n]])
    assert determinant(a @ b) == determinant(a) * determinant(b)


@settings(max_examples=30)
@given(st.integers(1, 4).flatmap(int_matrix))
def test_rank_nullity(rows):
    m = Matrix.of(Q, rows)
    ker = kernel(m)
    assert rank(m) + len(ker) == m.ncols
    for v in ker:
        assert all(sum(a * x for a, x in zip(r, v)) == 0 for r in m.rows)


@settings(max_examples=30)
@given(st.integers(1, 4).flatmap(int_matrix))
def test_rational_canonical_form(rows):
    m = Matrix.of(Q, rows)
    p, blocks = rational_canonical_form(m)
    assert inverse(p) @ m @ p == block_diag(Q, *[blk.matrix for blk in blocks])
    for a, b in zip(blocks, blocks[1:]):
        assert divmod(Q.poly(b.poly), Q.poly(a.poly))[1] == 0
    prod = (Q(1),)
    for blk in blocks:
        prod = tpoly_mul(Q, prod, blk.poly)
    assert tuple(prod) == tuple(char_poly(m))


@settings(max_examples=30)
@given(st.integers(1, 4).flatmap(int_matrix))
def test_elementary_divisors_two_ways(rows):
    m = Matrix.of(Q, rows)
    key = lambda pair: (len(pair[0]), str(pair))
    assert sorted(elementary_divisors(m), key=key) == sorted(elementary_divisors_ranks(m), key=key)


def test_smith_form_of_companion():
    m = Matrix.of(F7, [[0, 1, 0], [0, 0, 1], [2, 3, 0]])
    diag, _ = smith_form_tI(m)
    assert [d.degree() for d in diag] == [0, 0, 3]


def test_companion_has_its_char_poly():
    phi = tpoly_parse(Q, "t^3 - 2*t + 5")
    assert tuple(char_poly(companion(Q, phi))) == tuple(phi)


def test_D_invertibility():
    z = KQ.z
    a = Matrix.of(KQ, [[1 + z, z], [0, 2]])
    assert is_D_invertible(a)
    assert D_inverse(a) @ a == Matrix.identity(KQ, 2)
    assert not is_D_invertible(Matrix.of(KQ, [[z, 0], [0, 1]]))
    with pytest.raises(NotInvertible):
        inverse(Matrix.of(Q, [[1, 2], [2, 4]]))


def test_matmul_over_function_field():
    z = KQ.z
    a = Matrix.of(KQ, [[z, 1]])
    b = Matrix.of(KQ, [[1], [z]])
    assert matmul(a, b) == Matrix.of(KQ, [[2 * z]])


# -- polynomials in t ---------------------------------------------------------

def test_tpoly_text_round_trip():
    phi = tpoly_parse(F7, "t^2 - 2")
    assert tpoly_str(F7, phi) == "t^2-2"


def test_reverse_monic_is_involution():
    phi = tpoly_parse(Q, "t^2 + 3*t + 5")
    rev = tpoly_reverse_monic(Q, phi)
    assert tuple(rev) == tuple(tpoly_parse(Q, "t^2 + 3/5*t + 1/5"))
    assert tuple(tpoly_reverse_monic(Q, rev)) == tuple(phi)


def test_factoring():
    assert factor_tpoly(F7, tpoly_parse(F7, "t^2 - 3")) == [(tpoly_parse(F7, "t^2 - 3"), 1)]  # 3 is a non-square mod 7
    facs = factor_tpoly(KQ, (KQ(-1), KQ.zero, KQ.one))
    assert sorted(len(f) for f, _ in facs) == [2, 2]
    assert factor_tpoly(Q, tpoly_pow(Q, tpoly_parse(Q, "t - 2"), 3)) == [(tpoly_parse(Q, "t - 2"), 3)]


def test_band_block_modes():
    blk = companion_lift(K7, (F7(-5), F7(1)), 2, "decorated")
    z5 = K7(5)
    assert blk.matrix == Matrix.of(K7, [[z5, 1], [0, z5]])
    blk = companion_lift(KQ, (KQ.parse("-z"), KQ.one), 2, "plain")
    assert blk.size == 2
    with pytest.raises(ReduciblePolynomial):
        companion_lift(K7, (F7(-1), F7(0), F7(1)), 1, "decorated")
    with pytest.raises(PhiEqualsT):
        companion_lift(K7, (F7(0), F7(1)), 1, "decorated")
