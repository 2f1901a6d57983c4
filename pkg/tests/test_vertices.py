import numpy as np
import pytest

from bellscope.errors import ParameterOutOfRange, ResourceError
from bellscope.scenario import Scenario, cg_to_full
from bellscope.vertices import (DeterministicStrategy, enumerate_vertices, strategy_to_cg,
                                vertex_count, vertex_matrix)


@pytest.mark.parametrize("name", ["2222", "3322", "2233", "2322"])
def test_count_and_order(name):
    s = Scenario.parse(name)
    vs = enumerate_vertices(s)
    assert len(vs) == vertex_count(s) == s.nA ** s.mA * s.nB ** s.mB
    assert vs == sorted(vs)
    assert [v.index() for v in vs] == list(range(len(vs)))


@pytest.mark.parametrize("name", ["2222", "2233", "3422"])
def test_matrix_matches_strategies(name):
    s = Scenario.parse(name)
    V = vertex_matrix(s)
    for k, d in enumerate(enumerate_vertices(s)):
        assert tuple(V[k]) == strategy_to_cg(d).coords


def test_vertex_is_a_deterministic_behaviour():
    s = Scenario(2, 2, 3, 3)
    d = DeterministicStrategy(s, (2, 0), (1, 2))
    full = cg_to_full(strategy_to_cg(d))
    for iA in range(2):
        for iB in range(2):
            expect = np.zeros((3, 3), dtype=int)
            expect[d.aOut[iA], d.bOut[iB]] = 1
            assert (full[iA, iB] == expect).all()
            assert d.probability(iA, iB, d.aOut[iA], d.bOut[iB]) == 1


def test_bad_strategy_and_cap():
    s = Scenario(2, 2, 2, 2)
    with pytest.raises(ParameterOutOfRange):
        DeterministicStrategy(s, (0, 2), (0, 0))
    with pytest.raises(ParameterOutOfRange):
        DeterministicStrategy(s, (0,), (0, 0))
    with pytest.raises(ResourceError):
        enumerate_vertices(Scenario(3, 3, 2, 2), cap=10)
