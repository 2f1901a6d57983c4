from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellscope.catalog import (FamilyId, emit, embed_settings, from_table, identify, lifts, make,
                               merge_outcomes, parse, parse_many, positivity,
                               restrict_deterministic, restrict_outcomes, to_table)
from bellscope.errors import InvalidPartition, ParameterOutOfRange, ParseError
from bellscope.polytope import Inequality, is_facet, lhv_bound
from bellscope.scenario import Scenario, cg_to_full, full_to_cg
from bellscope.symmetry import equivalent

I4422_TABLE = ([-1, 0, 0, 0], [-3, -2, -1, 0],
               [[1, 1, 1, 1],
                [1, 1, 1, -1],
                [1, 1, -1, 0],
                [1, -1, 0, 0]])


def test_imm22_rule_reproduces_printed_4422():
    a, b, body = I4422_TABLE
    assert make("Imm22:4") == from_table(Scenario(4, 4, 2, 2), a, b, body, 0)


@pytest.mark.parametrize("name,bound", [("CHSH", 0), ("I3322", 0), ("I2233", 0), ("I3422_1", 2),
                                        ("I3422_2", 1), ("I3422_3", 2), ("Imm22:5", 0),
                                        ("I22nn:5", 0), ("Immnn:3,4", 0)])
def test_bounds_are_tight(name, bound):
    q = make(name)
    assert q.bound == bound
    assert lhv_bound(q.coeffs, q.scenario) == bound


def test_family_id_validation():
    assert str(FamilyId.parse("Immnn:3,4")) == "Immnn:3,4"
    with pytest.raises(ParameterOutOfRange):
        FamilyId.parse("I9999")
    with pytest.raises(ParameterOutOfRange):
        FamilyId("Imm22", (1,))
    with pytest.raises(ParameterOutOfRange):
        FamilyId("Imm22", ())


def test_positivity_is_a_facet():
    s = Scenario(2, 2, 3, 3)
    for k in [(0, 0, 0, 0), (1, 0, 2, 1), (1, 1, 2, 2)]:
        q = positivity(s, *k)
        assert lhv_bound(q.coeffs, s) == q.bound
        assert is_facet(q).is_facet


def _coeffs(s, draw):
    return draw(st.lists(st.integers(-5, 5), min_size=s.dimension, max_size=s.dimension)
                .filter(any))


@st.composite
def inequalities(draw):
    s = Scenario(draw(st.integers(1, 3)), draw(st.integers(1, 3)),
                 draw(st.integers(2, 4)), draw(st.integers(2, 4)))
    label = draw(st.one_of(st.none(), st.text("abcXYZ_:0123", min_size=1, max_size=8)))
    return Inequality(s, tuple(_coeffs(s, draw)), draw(st.integers(-9, 9)), label)


@settings(max_examples=100, deadline=None)
@given(inequalities())
def test_text_format_round_trip(q):
    text = emit(q)
    back = parse(text)
    assert back == q and back.label == q.label
    assert emit(back) == text


def test_parse_many_and_errors():
    text = emit(make("CHSH")) + "\n# comment\n" + emit(make("I2233"))
    qs = parse_many(text)
    assert [q.label for q in qs] == ["CHSH", "I2233"]
    with pytest.raises(ParseError):
        parse(text)
    with pytest.raises(ParseError):
        parse("scenario 2 2 2 2\nbound 0\n-1 | 0\n-1 | 1 | 1\n")
    with pytest.raises(ParseError):
        parse("scenario 2 2 2\n")
    with pytest.raises(ParseError):
        parse(emit(make("CHSH")).replace("bound 0", "bound x"))


def test_table_round_trip():
    q = make("I2233")
    assert from_table(q.scenario, *to_table(q), q.bound) == q


def test_restrict_i3322_to_chsh():
    r = restrict_deterministic(make("I3322"), {("A", 2): 1, ("B", 0): 1})
    assert r.scenario == Scenario(2, 2, 2, 2)
    assert equivalent(r, make("CHSH"))


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_imm22_contains_smaller_members(m):
    r = restrict_deterministic(make(f"Imm22:{m}"), {("A", m - 1): 1, ("B", 0): 1})
    assert r == make(f"Imm22:{m - 1}")


def test_chsh_corner_is_positivity():
    r = restrict_deterministic(make("CHSH"), {("A", 1): 1, ("B", 0): 1})
    assert equivalent(r, positivity(Scenario(1, 1, 2, 2), 0, 0, 0, 0))


def test_restriction_errors():
    with pytest.raises(ParameterOutOfRange):
        restrict_deterministic(make("CHSH"), {("A", 0): 1, ("A", 1): 0})
    with pytest.raises(ParameterOutOfRange):
        restrict_deterministic(make("CHSH"), {("C", 0): 1})
    with pytest.raises(ParameterOutOfRange):
        restrict_deterministic(make("CHSH"), {("A", 0): 2})


def test_i2233_outcome_restriction_gives_chsh():
    r = restrict_outcomes(make("I2233"), [(1, 2), (1, 2)], [(0, 2), (0, 2)])
    assert r == make("CHSH")


def _random_behaviour(s, rng):
    """A product behaviour, hence no-signalling."""
    pa = rng.dirichlet(np.ones(s.nA), size=s.mA)
    pb = rng.dirichlet(np.ones(s.nB), size=s.mB)
    return np.einsum("ij,kl->ikjl", pa, pb)


def test_merge_outcomes_evaluates_on_merged_behaviour():
    q = make("CHSH")
    maps_a, maps_b = [(0, 1, 1), (1, 0, 0)], [(0, 0, 1), (1, 0, 1)]
    lifted = merge_outcomes(q, maps_a, maps_b)
    assert lifted.scenario == Scenario(2, 2, 3, 3)
    assert lhv_bound(lifted.coeffs, lifted.scenario) == 0
    rng = np.random.default_rng(0)
    s, t = q.scenario, lifted.scenario
    for _ in range(5):
        big = _random_behaviour(t, rng)
        small = np.zeros((2, 2, 2, 2))
        for iA, iB, j, k in np.ndindex(2, 2, 3, 3):
            small[iA, iB, maps_a[iA][j], maps_b[iB][k]] += big[iA, iB, j, k]
        lhs = lifted.value(full_to_cg(t, big, tol=1e-12))
        rhs = q.value(full_to_cg(s, small, tol=1e-12))
        assert abs(lhs - rhs) < 1e-12


def test_merge_outcomes_validation():
    with pytest.raises(InvalidPartition):
        merge_outcomes(make("CHSH"), [(0, 0, 0), (0, 1, 1)], [(0, 1), (0, 1)])
    with pytest.raises(InvalidPartition):
        restrict_outcomes(make("I2233"), [(1, 1), (1, 2)], [(0, 2), (0, 2)])


def test_lifts_preserve_facets():
    for lifted in lifts(make("CHSH"), Scenario(2, 3, 2, 3)):
        assert is_facet(lifted).is_facet


def test_embed_settings_places_coefficients():
    q = embed_settings(make("CHSH"), 3, 2, [2, 0])
    assert q.scenario == Scenario(3, 2, 2, 2)
    assert equivalent(q, embed_settings(make("CHSH"), 3, 2))


def test_identify():
    assert identify(make("I3322")) == "I3322"
    assert identify(embed_settings(make("CHSH"), 3, 3)) == "CHSH"
    assert identify(make("I3422_3")) == "I3422_3"
    assert identify(Inequality(Scenario(2, 2, 2, 2), make("CHSH").coeffs, 1)) is None


def test_exact_evaluation_on_rational_behaviour():
    q = make("I3322")
    full = np.full((3, 3, 2, 2), Fraction(1, 4), dtype=object)
    # the rescaled value I + 1 vanishes at the uniform point
    assert q.value(full_to_cg(q.scenario, full)) == -1
    assert (cg_to_full(full_to_cg(q.scenario, full)) == full).all()
