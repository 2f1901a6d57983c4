"""Deterministic local strategies, i.e. the vertices of the local polytope."""

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import ParameterOutOfRange, ResourceError
from .scenario import CGVector, Scenario, cg_dimension

DEFAULT_VERTEX_CAP = 10**7


@dataclass(frozen=True, order=True)
class DeterministicStrategy:
    scenario: Scenario
    aOut: tuple
    bOut: tuple

    def __post_init__(self):
        s = self.scenario
        if len(self.aOut) != s.mA or len(self.bOut) != s.mB:
            raise ParameterOutOfRange("one outcome per setting is required")
        if any(not 0 <= o < s.nA for o in self.aOut) or any(not 0 <= o < s.nB for o in self.bOut):
            raise ParameterOutOfRange(f"outcome out of range in {self.aOut}/{self.bOut}")

    def probability(self, iA, iB, jA, jB):
        return int(self.aOut[iA] == jA and self.bOut[iB] == jB)

    def index(self):
        """Position in the lexicographic vertex order."""
        return strategy_index(self.scenario, self.aOut, self.bOut)


def vertex_count(s):
    return s.nA ** s.mA * s.nB ** s.mB


def _check_cap(s, cap):
    n = vertex_count(s)
    if n > cap:
        raise ResourceError(f"{s} has {n} vertices, above the cap of {cap}", limit=cap, observed=n)


def enumerate_vertices(s, cap=DEFAULT_VERTEX_CAP):
    _check_cap(s, cap)
    return [DeterministicStrategy(s, tuple(a), tuple(b))
            for a in product(range(s.nA), repeat=s.mA)
            for b in product(range(s.nB), repeat=s.mB)]


def strategy_index(s, aOut, bOut):
    idx = 0
    for o in aOut:
        idx = idx * s.nA + o
    for o in bOut:
        idx = idx * s.nB + o
    return idx


def strategy_to_cg(d):
    s = d.scenario
    coords = [0] * cg_dimension(s)
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        coords[s.a_index(iA, jA)] = int(d.aOut[iA] == jA)
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        coords[s.b_index(iB, jB)] = int(d.bOut[iB] == jB)
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        coords[s.joint_index(iA, iB, jA, jB)] = int(d.aOut[iA] == jA and d.bOut[iB] == jB)
    return CGVector(s, tuple(coords))


@lru_cache(maxsize=32)
def outcome_table(s, cap=DEFAULT_VERTEX_CAP):
    """Integer array (vertices x (mA + mB)) of outcome assignments, lex order."""
    _check_cap(s, cap)
    grids = np.indices([s.nA] * s.mA + [s.nB] * s.mB).reshape(s.mA + s.mB, -1).T
    grids.setflags(write=False)
    return grids


@lru_cache(maxsize=32)
def vertex_matrix(s, cap=DEFAULT_VERTEX_CAP):
    """Integer array (vertices x cg_dimension) of CG vertex coordinates, lex order."""
    out = outcome_table(s, cap)
    a = out[:, :s.mA]
    b = out[:, s.mA:]
    nv = out.shape[0]
    ka, kb = s.nA - 1, s.nB - 1
    a_ind = (a[:, :, None] == np.arange(ka)[None, None, :]).astype(np.int64)  # nv, mA, ka
    b_ind = (b[:, :, None] == np.arange(kb)[None, None, :]).astype(np.int64)
    joint = a_ind[:, :, None, :, None] * b_ind[:, None, :, None, :]  # nv, mA, mB, ka, kb
    mat = np.concatenate([a_ind.reshape(nv, -1), b_ind.reshape(nv, -1), joint.reshape(nv, -1)], axis=1)
    mat.setflags(write=False)
    return mat
