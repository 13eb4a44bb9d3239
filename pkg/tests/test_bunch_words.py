import random

import pytest
from hypothesis import given, strategies as st

from dbc.bunch import CoeffRing, DecoratedBunch, UnknownElement, validate
from dbc.cusps import atype_bunch, cusp_bunch
from dbc.words import (BadShiftIndex, Cycle, WordParseError, canonicalize, cycle_matches, free_groups, is_periodic,
                       is_valid, opposite, parse, rescale, rotate, shift, shift_parity, validate_word,
                       words_equivalent)
from helpers import random_cycle, random_string

T23 = cusp_bunch(((1, 0),))
BUNCHES = [T23, cusp_bunch(((2, 1),)), cusp_bunch(((3, 1),)), cusp_bunch(((1, 0), (1, 0))),
           atype_bunch(((2, 1), (1, 0), (1, 0)))]

seeds = st.integers(0, 10 ** 6)
bunch_ix = st.integers(0, len(BUNCHES) - 1)


def small_bunch():
    return DecoratedBunch(["a", "b"], ["c"], sim=[("a", "b")], dash=[("a", "c"), ("b", "c")],
                          le=[("a", "b")], tri=[("a", "a")])


# -- bunches ------------------------------------------------------------------

def test_cusp_bunches_are_valid():
    for b in BUNCHES:
        assert validate(b) == []


def test_cusp_shape():
    assert T23.E == ("x1_0", "y1_0")
    assert T23.F == ("xi1", "eta1")
    assert T23.partner["eta1"] == "xi1"
    assert T23.is_decorated("x1_0") and not T23.is_decorated("xi1")


def test_coefficient_rings():
    b = T23
    assert b.coefficient_ring("x1_0", "xi1") in set(CoeffRing)
    assert str(b.coefficient_ring("x1_0", "x1_0"))


def test_unknown_element():
    with pytest.raises(UnknownElement):
        T23.coefficient_ring("nope", "xi1")


def test_json_round_trip():
    for b in BUNCHES:
        assert DecoratedBunch.from_json(b.to_json()) == b


def test_dual_swaps_sides_and_is_involutive():
    b = small_bunch()
    d = b.dual()
    assert set(d.E) == set(b.F) and set(d.F) == set(b.E)
    assert d.dual() == b


def test_unknown_letter_in_word():
    assert [v.kind for v in validate_word(T23, parse("x1_0 -[0]- nope"))] == ["UnknownElement"]


def test_chain_is_sorted():
    b = cusp_bunch(((3, 1),))
    chain = b.chain("y1_0")
    assert all(b.le(u, v) for u, v in zip(chain, chain[1:]))


# -- words ----------------------------------------------------------------------

def test_parse_round_trip():
    for text in ["eta1 ~ xi1 -[0]- x1_0 ~ y1_0", "cycle(eta1 ~ xi1 -[2]- x1_0 ~ y1_0 ; [1])", "xi1"]:
        assert str(parse(text)) == text


def test_parse_errors():
    with pytest.raises(WordParseError):
        parse("x1_0 -[a]- xi1")


def test_validity():
    assert is_valid(T23, parse("eta1 ~ xi1 -[0]- x1_0 ~ y1_0"))
    assert validate_word(T23, parse("x1_0 -[0]- eta1"))
    assert not is_valid(T23, parse("x1_0 ~ xi1"))


def test_shift_index_bounds():
    W = parse("cycle(eta1 ~ xi1 -[2]- x1_0 ~ y1_0 ; [1])")
    assert shift(T23, W, 1) == (rotate(W, 1), "odd")
    with pytest.raises(BadShiftIndex):
        shift(T23, W, 2)


def test_parity_counts_same_side_pairs():
    W = parse("cycle(eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[1]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0 ; [0])")
    assert [shift_parity(T23, W, k) for k in range(4)] == [0, 1, 0, 1]


def test_periodic_cycle_detected():
    W = parse("cycle(eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[0]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0 ; [0])")
    assert is_periodic(W)


def _random_word(ix, seed):
    b = BUNCHES[ix]
    rng = random.Random(seed)
    if rng.random() < 0.5:
        W = random_cycle(b, rng)
        if W is not None:
            return b, W
    return b, random_string(b, rng)


@given(bunch_ix, seeds)
def test_canonicalize_is_idempotent(ix, seed):
    b, w = _random_word(ix, seed)
    c = canonicalize(b, w)
    assert canonicalize(b, c) == c
    assert is_valid(b, c)


@given(bunch_ix, seeds)
def test_opposite_is_involution(ix, seed):
    b, w = _random_word(ix, seed)
    assert opposite(opposite(w)) == w
    assert words_equivalent(b, w, opposite(w))


@given(bunch_ix, seeds, st.integers(-3, 3))
def test_rescaling_keeps_the_canonical_form(ix, seed, k):
    b, w = _random_word(ix, seed)
    groups = free_groups(b, w)
    if not groups:
        return
    j = random.Random(seed).choice(groups)
    moved = rescale(b, w, j, k)
    assert canonicalize(b, moved) == canonicalize(b, w)
    assert words_equivalent(b, w, moved)


@given(bunch_ix, seeds)
def test_every_rotation_matches(ix, seed):
    b, W = _random_word(ix, seed)
    if not isinstance(W, Cycle):
        return
    for k in range(len(W) // 2):
        V = rotate(W, k)
        hits = cycle_matches(b, W, V)
        assert (k, False, "odd" if shift_parity(b, W, k) else "even") in hits


def test_changing_a_decorated_invariant_breaks_equivalence():
    # the run eta1 ~ xi1 sits between two decorated groups: its two dashes
    # can trade decorations but their combined invariant is fixed
    a = parse("x1_0 ~ y1_0 -[1]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0")
    b = parse("x1_0 ~ y1_0 -[2]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0")
    c = parse("x1_0 ~ y1_0 -[2]- eta1 ~ xi1 -[1]- x1_0 ~ y1_0")
    assert not words_equivalent(T23, a, b)
    assert words_equivalent(T23, a, c)
    assert str(canonicalize(T23, c)) == str(a)


def test_open_ends_are_swept_to_zero():
    w = parse("eta1 ~ xi1 -[1]- x1_0 ~ y1_0 -[3]- eta1 ~ xi1")
    assert str(canonicalize(T23, w)) == "eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[0]- eta1 ~ xi1"
