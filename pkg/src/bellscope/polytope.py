"""Local polytope facets: exact enumeration, verification and LHV bounds.

Facets are found with the incremental double-description method applied to
the cone of valid inequalities

    C = {(b, a) : b - a.v >= 0 for every vertex v},

whose extreme rays are exactly the facets ``a.x <= b`` of the hull (the
vertices span the space, so C is pointed). Rays are tracked through their
slack vectors over *all* vertices, which turns each combination step into a
single integer array operation; adjacency uses the exact combinatorial test.
"""

import logging
import os
import time
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from . import linalg
from .errors import InvalidInequality, ResourceError, ShapeMismatch
from .scenario import Scenario, cg_dimension
from .vertices import DEFAULT_VERTEX_CAP, vertex_matrix

log = logging.getLogger(__name__)

CAP_ENV = "BELLSCOPE_CAP_SECONDS"
DEFAULT_RAY_CAP = 2_000_000
_SAFE_INT = 2**62


@dataclass(frozen=True)
class Inequality:
    """``coeffs . v <= bound`` over CG coordinates, normalised to gcd 1."""

    scenario: Scenario
    coeffs: tuple
    bound: int
    label: str = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.coeffs) != cg_dimension(self.scenario):
            raise ShapeMismatch(
                f"{self.scenario} needs {cg_dimension(self.scenario)} coefficients, "
                f"got {len(self.coeffs)}")
        if not any(self.coeffs):
            raise InvalidInequality("all coefficients are zero")

    @classmethod
    def normalized(cls, scenario, coeffs, bound, label=None):
        coeffs = [int(c) for c in coeffs]
        bound = int(bound)
        g = 0
        for c in coeffs:
            g = gcd(g, c)
        g = gcd(g, bound)
        if g > 1:
            coeffs = [c // g for c in coeffs]
            bound //= g
        return cls(scenario, tuple(coeffs), bound, label)

    def with_label(self, label):
        return Inequality(self.scenario, self.coeffs, self.bound, label)

    def value(self, v):
        """Left-hand side evaluated at a CG vector or plain sequence."""
        coords = v.coords if hasattr(v, "coords") else v
        return sum(c * x for c, x in zip(self.coeffs, coords))

    def sort_key(self):
        return (self.coeffs, self.bound)

    def vertex_values(self):
        """Integer array of ``coeffs . v`` over the lexicographic vertex list."""
        return _vertex_values(self.coeffs, self.scenario)


@dataclass(frozen=True)
class FacetCertificate:
    inequality: Inequality
    tightVertexIndices: tuple
    affineRank: int

    @property
    def is_facet(self):
        return self.affineRank == cg_dimension(self.inequality.scenario) - 1

    def __bool__(self):
        return self.is_facet


def _vertex_values(coeffs, s, cap=DEFAULT_VERTEX_CAP):
    V = vertex_matrix(s, cap)
    c = np.asarray(coeffs, dtype=object)
    if max((abs(int(x)) for x in coeffs), default=0) * V.shape[1] < _SAFE_INT:
        return V @ np.asarray(coeffs, dtype=np.int64)
    return V.astype(object) @ c


def lhv_bound(coeffs, s, cap=DEFAULT_VERTEX_CAP):
    """Maximum of ``coeffs . v`` over the deterministic strategies of ``s``."""
    coeffs = coeffs.coeffs if isinstance(coeffs, Inequality) else coeffs
    if len(coeffs) != cg_dimension(s):
        raise ShapeMismatch(f"{s} needs {cg_dimension(s)} coefficients, got {len(coeffs)}")
    return int(max(_vertex_values(coeffs, s, cap)))


def is_facet(q, cap=DEFAULT_VERTEX_CAP):
    s = q.scenario
    vals = _vertex_values(q.coeffs, s, cap)
    worst = int(np.argmax(vals))
    if vals[worst] > q.bound:
        raise InvalidInequality(
            f"vertex {worst} reaches {vals[worst]} > bound {q.bound}",
            vertex_index=worst, value=int(vals[worst]))
    tight = np.flatnonzero(vals == q.bound)
    if len(tight) == 0:
        return FacetCertificate(q, (), -1)
    V = vertex_matrix(s, cap)
    rows = [[1] + V[k].tolist() for k in tight]
    return FacetCertificate(q, tuple(int(k) for k in tight), linalg.rank(rows) - 1)


# double description -------------------------------------------------------------

def _time_cap(seconds):
    if seconds is not None:
        return seconds
    env = os.environ.get(CAP_ENV)
    return float(env) if env else None


def _primitive(mat):
    """Divide each row of an integer matrix by the gcd of its entries."""
    if mat.dtype == object:
        out = mat.copy()
        for i in range(out.shape[0]):
            g = 0
            for v in out[i]:
                g = gcd(g, int(v))
            if g > 1:
                out[i] = out[i] // g
        return out
    g = np.gcd.reduce(mat, axis=1)
    g[g == 0] = 1
    return mat // g[:, None]


@dataclass
class EnumerationResult:
    facets: list
    equations: list   # affine hull equations (coeffs, rhs) if the vertices are degenerate
    max_rays: int
    seconds: float


def double_description(points, cap_seconds=None, ray_cap=DEFAULT_RAY_CAP):
    """Facets of conv(points) for an integer point matrix.

    Returns ``EnumerationResult`` with facets as ``(coeffs, bound)`` pairs in
    the ambient coordinates. If the points lie in a proper affine subspace
    the facets are taken relative to it and ``equations`` spans its
    defining equations.
    """
    start = time.monotonic()
    cap_seconds = _time_cap(cap_seconds)
    P = np.asarray(points, dtype=np.int64)
    npts, dim = P.shape
    H = np.concatenate([np.ones((npts, 1), dtype=np.int64), -P], axis=1)  # slack = H @ y
    H_rows = H.tolist()

    # column basis makes the cone pointed when the points are degenerate
    cols = linalg.independent_rows([list(c) for c in zip(*H_rows)])
    r = len(cols)
    equations = []
    if r < dim + 1:
        for y in linalg.nullspace(H_rows, dim + 1):
            equations.append((tuple(y[1:]), y[0]))
    HS = H[:, cols]

    init = linalg.independent_rows(HS.tolist(), limit=r)
    inv = linalg.inverse(HS[init].tolist())
    # columns of the inverse are the rays of the initial simplicial cone;
    # rays are carried only as slack vectors and recovered at the end
    Y0 = [linalg.integer_row([inv[i][j] for i in range(r)]) for j in range(r)]
    S = np.array([[sum(a * b for a, b in zip(h, y)) for h in HS.tolist()] for y in Y0], dtype=object)
    if np.abs(S).max() < 2**40:
        S = S.astype(np.int64)
    S = _primitive(S)

    processed = np.zeros(npts, dtype=bool)
    processed[init] = True
    order = [k for k in range(npts) if not processed[k]]
    max_rays = len(S)

    for step, k in enumerate(order):
        if cap_seconds is not None and time.monotonic() - start > cap_seconds:
            raise ResourceError(
                f"facet enumeration exceeded {cap_seconds}s after {step} of {len(order)} insertions",
                limit=cap_seconds, observed=time.monotonic() - start)
        col = S[:, k]
        pos = np.flatnonzero(col > 0)
        neg = np.flatnonzero(col < 0)
        zer = np.flatnonzero(col == 0)
        if len(neg) == 0:
            processed[k] = True
            continue
        Z = (S[:, processed] == 0)
        need = r - 2
        new_S = []
        if len(pos):
            Zneg = Z[neg]
            notZT = (~Z).astype(np.float32).T  # processed x rays
            for p in pos:
                common = Zneg & Z[p]
                counts = common.sum(axis=1)
                cand = np.flatnonzero(counts >= need)
                if len(cand) == 0:
                    continue
                C = common[cand].astype(np.float32)
                # a ray q blocks the pair when its zero set contains the common zeros
                blocked = (C @ notZT) == 0
                nblock = blocked.sum(axis=1)
                ok = cand[nblock == 2]
                if len(ok) == 0:
                    continue
                nidx = neg[ok]
                a = S[p, k]
                b = -S[nidx, k]
                new_S.append(S[nidx] * a + S[p][None, :] * b[:, None])
        keep = np.concatenate([pos, zer])
        S = np.concatenate([S[keep]] + new_S, axis=0)
        if new_S:
            S = _primitive(S)
        if S.dtype != object and np.abs(S).max(initial=0) > 2**40:
            S = S.astype(object)
        processed[k] = True
        max_rays = max(max_rays, len(S))
        if len(S) > ray_cap:
            raise ResourceError(f"intermediate ray count {len(S)} exceeds cap {ray_cap}",
                                limit=ray_cap, observed=len(S))
        log.debug("insert %d/%d: %d rays", step + 1, len(order), len(S))

    facets = []
    for srow in S[:, init].tolist():
        row = linalg.integer_row(linalg.matvec(inv, srow))
        y = [0] * (dim + 1)
        for c, v in zip(cols, row):
            y[c] = v
        bound = y[0]
        coeffs = tuple(y[1:])
        facets.append((coeffs, bound))
    return EnumerationResult(facets, equations, max_rays, time.monotonic() - start)


def enumerate_facets(s, cap_seconds=None, vertex_cap=DEFAULT_VERTEX_CAP, ray_cap=DEFAULT_RAY_CAP):
    """All facets of the local polytope of ``s``, normalised and sorted."""
    V = vertex_matrix(s, vertex_cap)
    res = double_description(V, cap_seconds=cap_seconds, ray_cap=ray_cap)
    out = {Inequality.normalized(s, c, b) for c, b in res.facets}
    log.info("%s: %d facets in %.1fs (peak %d rays)", s, len(out), res.seconds, res.max_rays)
    return sorted(out, key=Inequality.sort_key)
