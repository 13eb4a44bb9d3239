import itertools
import re
from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given, strategies as st

from dbc.cusps import (BadCase, BadParams, BadType, atype_bunch, check_quotient_relations, cusp_bunch, dual_graph,
                       equation_catalog, fold_negative, hj_expansion, negative_fraction, parse_type, pi_poset)


@st.composite
def coprime_pair(draw, hi=60):
    n = draw(st.integers(2, hi))
    m = draw(st.integers(1, n - 1).filter(lambda m: gcd(n, m) == 1))
    return n, m


def test_hj_known_values():
    h = hj_expansion(5, 2)
    assert h.to_json() == {"n": 5, "m": 2, "a": [2, 3], "c": [5, 3, 1, 0], "d": [0, 1, 2, 5]}
    assert dual_graph(5, 2) == (3, 2)
    assert negative_fraction(7, 3) == (3, 2, 2)
    assert hj_expansion(1, 0).to_json() == {"n": 1, "m": 0, "a": [], "c": [1, 0], "d": [0, 1]}


@given(coprime_pair())
def test_fractions_evaluate_back(pair):
    n, m = pair
    a = hj_expansion(n, m).a
    assert all(x >= 2 for x in a)
    assert fold_negative(a) == Fraction(n, n - m)
    assert fold_negative(dual_graph(n, m)) == Fraction(n, m)
    assert check_quotient_relations(n, m) == []


@given(coprime_pair())
def test_exponent_recursions(pair):
    n, m = pair
    h = hj_expansion(n, m)
    for i in range(1, h.e + 1):
        assert h.cExp[i + 1] == h.a[i - 1] * h.cExp[i] - h.cExp[i - 1]
    # consecutive exponent vectors span a lattice of index n
    for i in range(h.e + 1):
        assert h.cExp[i] * h.dExp[i + 1] - h.cExp[i + 1] * h.dExp[i] == n


@given(coprime_pair(30))
def test_pi_poset_is_a_permutation(pair):
    n, m = pair
    pi = pi_poset(n, m)
    assert sorted(pi.bar) == list(range(n))
    assert all(pi.bar[(l * m) % n] == l for l in range(n))


def test_bad_pairs():
    with pytest.raises(BadType):
        cusp_bunch(((4, 2),))
    with pytest.raises(BadType):
        parse_type("(2,")
    with pytest.raises(BadType):
        atype_bunch(((1, 0),))


def test_parse_type():
    assert parse_type("(3,1),(2,1)") == ((3, 1), (2, 1))
    assert parse_type("(1,0)") == ((1, 0),)


def test_bunch_sizes():
    b = cusp_bunch(((3, 1), (2, 1)))
    assert len(b.E) == 2 * (3 + 2) and len(b.F) == 4
    a = atype_bunch(((2, 1), (1, 0), (1, 0)))
    assert "xi1" not in a.F and "eta3" not in a.F


def _sym(text):
    # prefix names so that variables such as "as" are not Python keywords
    return sympy.sympify(re.sub(r"\b([A-Za-z_]\w*)", r"v_\1", text.replace("^", "**")))


def _sympy_identity_holds(entry) -> bool:
    """Substitute each branch's images into every relation and expand."""
    subs = entry.substitutions
    branches = len(next(iter(subs.values())))
    for rel in entry.relations:
        expr = _sym(rel)
        for j in range(branches):
            images = {sympy.Symbol("v_" + g): _sym(subs[g][j]) for g in subs}
            if sympy.expand(expr.xreplace(images)) != 0:
                return False
    return True


@pytest.mark.parametrize("case", range(1, 13))
def test_catalog_against_sympy(case):
    for p, q, r in itertools.product((2, 3, 5), repeat=3):
        entry = equation_catalog(case, p, q, r)
        assert entry.verified, entry.failures
        assert _sympy_identity_holds(entry)


def test_catalog_first_case():
    e = equation_catalog(1)
    assert e.relations == ["y^3 + z^2 - x*y*z"]


def test_catalog_errors():
    with pytest.raises(BadCase):
        equation_catalog(13)
    with pytest.raises(BadParams):
        equation_catalog(2, p=1)
