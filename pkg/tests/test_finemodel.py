import random
from fractions import Fraction

import pytest

from bellscope.catalog import make
from bellscope.errors import NotLocal, UnsupportedScenario
from bellscope.finemodel import certify_local, fine_model, precondition_facets
from bellscope.linalg import hull_membership
from bellscope.polytope import enumerate_facets
from bellscope.scenario import CGVector, Scenario, uniform_behavior
from bellscope.vertices import enumerate_vertices, strategy_to_cg, vertex_matrix

S3 = Scenario(3, 2, 2, 2)


def _mixture(s, rnd, k):
    V = vertex_matrix(s).tolist()
    pts = rnd.sample(V, k)
    w = [Fraction(rnd.randint(1, 30)) for _ in range(k)]
    t = sum(w)
    return CGVector(s, tuple(sum(wi * p[c] for wi, p in zip(w, pts)) / t for c in range(len(V[0]))))


def test_vertices_give_point_masses():
    for d in enumerate_vertices(S3):
        dist = fine_model(strategy_to_cg(d))
        support = [k for k, p in dist.probs.items() if p]
        assert support == [d.aOut + d.bOut]


def test_uniform_behaviour():
    dist = fine_model(uniform_behavior(S3))
    assert dist.is_valid()
    for iA in range(3):
        for iB in range(2):
            assert dist.pair(iA, iB, 0, 0) == Fraction(1, 4)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_random_mixtures_are_reproduced_exactly(m):
    s = Scenario(m, 2, 2, 2)
    rnd = random.Random(m)
    for _ in range(40):
        v = _mixture(s, rnd, rnd.randint(1, 7))
        dist = fine_model(v)
        assert dist.is_valid()
        assert dist.to_cg().coords == v.coords


def test_preconditions_are_the_full_facet_list():
    """For (3,2,2,2) positivity plus CHSH is every facet of the local polytope."""
    mine = {q.coeffs + (q.bound,) for q in precondition_facets(S3)}
    assert mine == {q.coeffs + (q.bound,) for q in enumerate_facets(S3)}


def test_agrees_with_exact_lp():
    s = S3
    rnd = random.Random(17)
    u = uniform_behavior(s).coords
    inside = outside = 0
    for _ in range(60):
        x = _mixture(s, rnd, rnd.randint(2, 6)).coords
        lam = Fraction(rnd.randint(10, 16), 10)
        y = tuple(a + lam * (b - a) for a, b in zip(u, x))
        local, _ = certify_local(CGVector(s, y))
        member = hull_membership(vertex_matrix(s).tolist(), y) is not None
        assert local == member
        inside += member
        outside += not member
    assert inside and outside


def test_tsirelson_point_is_rejected_with_a_chsh_witness():
    s = Scenario(2, 2, 2, 2)
    # rational approximation of the optimal quantum CHSH behaviour
    c = Fraction(85, 100)
    p_same = (1 + c * Fraction(7071, 10000)) / 2 / 2
    p_diff = Fraction(1, 2) - p_same
    half = Fraction(1, 2)
    coords = [half, half, half, half, p_same, p_same, p_same, p_diff]
    v = CGVector(s, tuple(coords))
    assert make("CHSH").value(v) > 0
    local, witness = certify_local(v)
    assert not local and witness.label == "CHSH"
    with pytest.raises(NotLocal) as exc:
        fine_model(v)
    assert exc.value.value > 0


def test_zero_conditioning_cells():
    s = Scenario(2, 2, 2, 2)
    # B1 and B2 both always give outcome 0, so P(b1, b2) vanishes off (0, 0)
    v = CGVector(s, (Fraction(1, 3), Fraction(1, 2), 1, 1,
                     Fraction(1, 3), Fraction(1, 3), Fraction(1, 2), Fraction(1, 2)))
    dist = fine_model(v)
    assert dist.is_valid() and dist.to_cg().coords == v.coords


def test_other_scenarios_unsupported():
    with pytest.raises(UnsupportedScenario):
        certify_local(uniform_behavior(Scenario(2, 3, 2, 2)))
    with pytest.raises(UnsupportedScenario):
        fine_model(uniform_behavior(Scenario(2, 2, 3, 2)))
