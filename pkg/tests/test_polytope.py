from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from bellscope.catalog import make
from bellscope.errors import InvalidInequality, ResourceError, ShapeMismatch
from bellscope.polytope import (Inequality, double_description, enumerate_facets, is_facet,
                                lhv_bound)
from bellscope.scenario import Scenario
from bellscope.vertices import vertex_matrix


def _qhull_facets(s):
    """Facets from Qhull (floating point), rounded to primitive integer rows."""
    V = vertex_matrix(s).astype(float)
    hull = ConvexHull(V)
    out = set()
    for eq in hull.equations:
        normal, offset = eq[:-1], eq[-1]   # normal . x + offset <= 0
        scale = min(abs(x) for x in normal if abs(x) > 1e-9)
        row = np.round(np.append(normal, -offset) / scale * 12)
        fr = [Fraction(int(x)) for x in row]
        g = np.gcd.reduce([int(x) for x in row])
        out.add(tuple(int(x) // g for x in fr))
    return out


@pytest.mark.parametrize("name", ["2222", "2322"])
def test_matches_qhull(name, facets):
    s = Scenario.parse(name)
    mine = {q.coeffs + (q.bound,) for q in facets(name)}
    assert mine == _qhull_facets(s)


@pytest.mark.parametrize("name,count", [("2222", 24), ("2322", 48), ("2223", 96)])
def test_every_enumerated_facet_is_certified(name, count, facets):
    fs = facets(name)
    assert len(fs) == count
    assert all(is_facet(q).is_facet for q in fs)
    assert list(fs) == sorted(fs, key=Inequality.sort_key)


def test_lhv_bound_and_facet_certificate():
    q = make("I3322")
    assert lhv_bound(q.coeffs, q.scenario) == 0
    cert = is_facet(q)
    assert cert and cert.affineRank == q.scenario.dimension - 1
    # a valid but non-tight inequality is not a facet
    loose = Inequality(q.scenario, q.coeffs, 1)
    assert not is_facet(loose)
    # an invalid one is rejected with the offending vertex
    with pytest.raises(InvalidInequality) as exc:
        is_facet(Inequality(q.scenario, q.coeffs, -1))
    assert exc.value.value == 0


def test_sum_of_facets_is_not_a_facet():
    a, b = make("CHSH"), make("Positivity:0,0,0,0", Scenario(2, 2, 2, 2))
    q = Inequality.normalized(a.scenario, [x + y for x, y in zip(a.coeffs, b.coeffs)],
                              a.bound + b.bound)
    assert lhv_bound(q.coeffs, q.scenario) <= q.bound
    assert not is_facet(q).is_facet


def test_inequality_validation():
    s = Scenario(2, 2, 2, 2)
    with pytest.raises(ShapeMismatch):
        Inequality(s, (1, 0), 0)
    with pytest.raises(InvalidInequality):
        Inequality(s, (0,) * 8, 1)
    assert Inequality.normalized(s, [2] * 8, 4).coeffs == (1,) * 8


def test_degenerate_point_set_gives_relative_facets():
    # a square embedded in 3-space: four edges plus one affine equation
    pts = [[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]]
    res = double_description(pts)
    assert len(res.facets) == 4
    assert len(res.equations) == 1
    coeffs, rhs = res.equations[0]
    assert all(sum(c * x for c, x in zip(coeffs, p)) == -rhs or
               sum(c * x for c, x in zip(coeffs, p)) == rhs for p in pts)


def test_time_cap(monkeypatch):
    monkeypatch.setenv("BELLSCOPE_CAP_SECONDS", "0.001")
    with pytest.raises(ResourceError):
        enumerate_facets(Scenario(3, 3, 2, 2))


def test_ray_cap():
    with pytest.raises(ResourceError):
        enumerate_facets(Scenario(3, 3, 2, 2), ray_cap=50)
