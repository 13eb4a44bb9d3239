import random

import pytest
from hypothesis import given, settings, strategies as st

from dbc.canon import BandData, InvalidWord, PeriodicCycle, StringData, build, build_band, build_string
from dbc.cusps import atype_bunch, cusp_bunch
from dbc.linalg import Matrix
from dbc.reduce import (DecompositionReport, bands_match, certify, decompose, isomorphic, leading_pair,
                        same_decomposition)
from dbc.reps import (EConditionViolated, Representation, apply_T1, compose_log, direct_sum, is_morphism,
                      random_conjugate, replay, validate_rep)
from dbc.scalars import function_field, prime_field, rationals
from dbc.words import parse, rotate
from helpers import expected_report, random_rep, random_sum

K = function_field(prime_field(101))
k = K.base
KQ = function_field(rationals())
T23 = cusp_bunch(((1, 0),))
BUNCHES = [T23, cusp_bunch(((2, 1),)), cusp_bunch(((1, 0), (1, 0))), atype_bunch(((2, 1), (1, 0), (1, 0)))]
BAND = parse("cycle(eta1 ~ xi1 -[2]- x1_0 ~ y1_0 ; [1])")


# -- canonical representations --------------------------------------------------

def test_string_dimension_is_word_length():
    w = parse("eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[3]- eta1 ~ xi1")
    assert build_string(T23, K, w).total_size() == len(w)


def test_band_dimension():
    M = build_band(T23, K, BAND, 3, (k(-2), k(0), k(1)))
    assert M.total_size() == len(BAND) * 3 * 2


def test_longer_band_is_valid():
    W = parse("cycle(eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[1]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0 ; [0])")
    M = build_band(T23, K, W, 1, (k(-3), k(1)))
    assert validate_rep(M) == []


def test_bad_inputs():
    with pytest.raises(InvalidWord):
        build_string(T23, K, parse("x1_0 ~ xi1"))
    periodic = parse("cycle(eta1 ~ xi1 -[0]- x1_0 ~ y1_0 -[0]- eta1 ~ xi1 -[0]- x1_0 ~ y1_0 ; [0])")
    with pytest.raises(PeriodicCycle):
        build_band(T23, K, periodic, 1, (k(-3), k(1)))


# -- representations and moves ------------------------------------------------------

def test_json_round_trip():
    M = direct_sum(build_band(T23, K, BAND, 2, (k(-5), k(1))),
                   build_string(T23, K, parse("eta1 ~ xi1 -[1]- x1_0 ~ y1_0")))
    assert Representation.from_json(M.to_json(), K) == M


def test_size_mismatch_is_reported():
    M = Representation(T23, K, {"x1_0": 1, "y1_0": 2})
    assert [v.kind for v in validate_rep(M)] == ["SizeMismatch"]


def test_decorated_partners_need_equal_residues():
    S = build_string(T23, K, parse("x1_0 ~ y1_0"))
    with pytest.raises(EConditionViolated):
        apply_T1(S, {"x1_0": Matrix.of(K, [[2]]), "y1_0": Matrix.of(K, [[3]])})
    # a z-multiple difference is allowed
    apply_T1(S, {"x1_0": Matrix.of(K, [[2]]), "y1_0": Matrix.of(K, [[2 + K.z]])})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, len(BUNCHES) - 1), st.integers(0, 10 ** 6))
def test_move_log_is_a_morphism(ix, seed):
    b = BUNCHES[ix]
    _, M = random_sum(b, K, random.Random(seed))
    R, log = random_conjugate(M, seed, 20)
    assert replay(M, log) == R
    assert is_morphism(compose_log(M, log), M, R)


# -- reduction ----------------------------------------------------------------------

def test_zero_representation_has_empty_report():
    r = decompose(Representation(T23, K, {}))
    assert r.strings == [] and r.bands == []


def test_leading_pair():
    lp = leading_pair(build_string(T23, K, parse("eta1 ~ xi1 -[0]- x1_0 ~ y1_0")))
    assert (lp.x0, lp.y0, lp.d) == ("x1_0", "xi1", 0)


def test_report_json():
    r = decompose(build_string(T23, K, parse("xi1 ~ eta1")))
    assert r.to_json(k) == {"strings": ["eta1 ~ xi1"], "bands": [], "steps": 0}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, len(BUNCHES) - 1), st.integers(0, 10 ** 6))
def test_round_trip(ix, seed):
    b = BUNCHES[ix]
    items, M = random_sum(b, K, random.Random(seed))
    R, _ = random_conjugate(M, seed, 30)
    rep = decompose(R)
    assert same_decomposition(b, rep, expected_report(b, K, items))
    assert certify(rep)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_round_trip_over_rationals(seed):
    items, M = random_sum(T23, KQ, random.Random(seed))
    rep = decompose(random_conjugate(M, seed, 20)[0])
    assert same_decomposition(T23, rep, expected_report(T23, KQ, items))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, len(BUNCHES) - 1), st.integers(0, 10 ** 6))
def test_pieces_account_for_the_dimension(ix, seed):
    b = BUNCHES[ix]
    M = random_rep(b, K, random.Random(seed), 2)
    rep = decompose(M)
    assert certify(rep)
    pieces = sum(build(b, K, it).total_size() for it in rep.strings + rep.bands)
    assert pieces == M.total_size()


def test_isomorphic_detects_multiplicity_and_eigenvalue():
    A = build_band(T23, K, BAND, 2, (k(-5), k(1)))
    assert isomorphic(A, random_conjugate(A, 1, 30)[0])
    assert not isomorphic(A, build_band(T23, K, BAND, 2, (k(-6), k(1))))
    assert not isomorphic(A, direct_sum(build_band(T23, K, BAND, 1, (k(-5), k(1))),
                                        build_band(T23, K, BAND, 1, (k(-5), k(1)))))


def test_bands_match_uses_reciprocal_on_odd_shift():
    A = BandData(BAND, 1, (k(-5), k(1)))
    B = BandData(rotate(BAND, 1), 1, (k(-5) ** -1, k(1)))
    assert bands_match(T23, A, B)
    assert not bands_match(T23, A, BandData(rotate(BAND, 1), 1, (k(-5), k(1))))


def test_string_report_orientation_is_stable():
    w = parse("x1_0 ~ y1_0 -[1]- eta1 ~ xi1")
    a = decompose(build_string(T23, K, w)).strings
    from dbc.words import opposite
    b = decompose(build_string(T23, K, opposite(w))).strings
    assert [str(s) for s in a] == [str(s) for s in b]
