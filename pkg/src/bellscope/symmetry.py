"""Local relabelling symmetries, canonical forms and orbit classification.

A group element relabels outcomes per setting, permutes each party's
settings and (for symmetric scenarios) may swap the parties. Internally an
element is a map on *slots* ``(party, setting)``: slot ``x`` goes to
``slot_map[x]`` and its outcome ``o`` becomes ``outcome_perm[x][o]``.

Inequalities transform through their values on the vertices,
``(g.q)(v) = q(g^-1 . v)``, and are re-expressed in CG coordinates by an
exact affine solve against a spanning set of vertices. This sidesteps the
affine bookkeeping that outcome relabelling causes in CG coordinates.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from math import factorial

import numpy as np

from . import linalg
from .errors import IncompatibleScenario, InvalidInequality, ResourceError
from .polytope import Inequality
from .scenario import cg_dimension
from .vertices import DeterministicStrategy, outcome_table, vertex_matrix

DEFAULT_GROUP_CAP = 5 * 10**7   # group order x vertex count


def _identity(n):
    return tuple(range(n))


@dataclass(frozen=True)
class SymmetryElement:
    """First relabel outcomes and settings within each party, then optionally swap."""

    aSettingPerm: tuple
    bSettingPerm: tuple
    aOutcomePerms: tuple
    bOutcomePerms: tuple
    partySwap: bool = False

    @classmethod
    def identity(cls, s):
        return cls(_identity(s.mA), _identity(s.mB),
                   (_identity(s.nA),) * s.mA, (_identity(s.nB),) * s.mB, False)

    def check(self, s):
        ok = (sorted(self.aSettingPerm) == list(range(s.mA))
              and sorted(self.bSettingPerm) == list(range(s.mB))
              and len(self.aOutcomePerms) == s.mA and len(self.bOutcomePerms) == s.mB
              and all(sorted(p) == list(range(s.nA)) for p in self.aOutcomePerms)
              and all(sorted(p) == list(range(s.nB)) for p in self.bOutcomePerms))
        if not ok:
            raise IncompatibleScenario(f"{self} does not act on scenario {s}")
        if self.partySwap and not s.symmetric:
            raise IncompatibleScenario(f"party swap needs mA = mB and nA = nB, got {s}")

    # slot form -------------------------------------------------------------

    def slot_form(self):
        mA, mB = len(self.aSettingPerm), len(self.bSettingPerm)
        slot_map = [0] * (mA + mB)
        for i, j in enumerate(self.aSettingPerm):
            slot_map[i] = (mA + j) if self.partySwap else j
        for i, j in enumerate(self.bSettingPerm):
            slot_map[mA + i] = j if self.partySwap else mA + j
        return tuple(slot_map), tuple(self.aOutcomePerms) + tuple(self.bOutcomePerms)

    @classmethod
    def from_slot_form(cls, slot_map, outs, mA, swap):
        a_set, b_set = [0] * mA, [0] * (len(slot_map) - mA)
        for x, y in enumerate(slot_map):
            target = y - mA if y >= mA else y
            if x < mA:
                a_set[x] = target
            else:
                b_set[x - mA] = target
        return cls(tuple(a_set), tuple(b_set), tuple(outs[:mA]), tuple(outs[mA:]), swap)

    def compose(self, other):
        """``self . other``: apply ``other`` first."""
        g_map, g_out = self.slot_form()
        h_map, h_out = other.slot_form()
        k_map = tuple(g_map[h_map[x]] for x in range(len(h_map)))
        k_out = tuple(tuple(g_out[h_map[x]][h_out[x][o]] for o in range(len(h_out[x])))
                      for x in range(len(h_map)))
        return SymmetryElement.from_slot_form(k_map, k_out, len(self.aSettingPerm),
                                              self.partySwap != other.partySwap)

    def inverse(self):
        g_map, g_out = self.slot_form()
        n = len(g_map)
        inv_map = [0] * n
        inv_out = [None] * n
        for x, y in enumerate(g_map):
            inv_map[y] = x
            p = g_out[x]
            ip = [0] * len(p)
            for o, q in enumerate(p):
                ip[q] = o
            inv_out[y] = tuple(ip)
        return SymmetryElement.from_slot_form(tuple(inv_map), tuple(inv_out),
                                              len(self.aSettingPerm), self.partySwap)


def group_order(s, party_swap=True):
    order = (factorial(s.mA) * factorial(s.mB)
             * factorial(s.nA) ** s.mA * factorial(s.nB) ** s.mB)
    return order * (2 if party_swap and s.symmetric else 1)


def group_elements(s, party_swap=True):
    """Every element of the relabelling group, in a fixed order."""
    swaps = (False, True) if party_swap and s.symmetric else (False,)
    a_outs = list(product(permutations(range(s.nA)), repeat=s.mA))
    b_outs = list(product(permutations(range(s.nB)), repeat=s.mB))
    return [SymmetryElement(sa, sb, oa, ob, sw)
            for sw in swaps
            for sa in permutations(range(s.mA))
            for sb in permutations(range(s.mB))
            for oa in a_outs
            for ob in b_outs]


def act_on_strategy(g, d):
    s = d.scenario
    g.check(s)
    slot_map, outs = g.slot_form()
    old = tuple(d.aOut) + tuple(d.bOut)
    new = [0] * len(old)
    for x, o in enumerate(old):
        new[slot_map[x]] = outs[x][o]
    return DeterministicStrategy(s, tuple(new[:s.mA]), tuple(new[s.mA:]))


# vertex-level machinery ---------------------------------------------------------

def _radix_weights(s):
    radices = [s.nA] * s.mA + [s.nB] * s.mB
    w = np.ones(len(radices), dtype=np.int64)
    for x in range(len(radices) - 2, -1, -1):
        w[x] = w[x + 1] * radices[x + 1]
    return w


def vertex_permutation(g, s):
    """``perm[k]`` is the index of ``g . v_k`` in the lexicographic vertex list."""
    O = outcome_table(s)
    slot_map, outs = g.slot_form()
    new = np.empty_like(O)
    for x, y in enumerate(slot_map):
        new[:, y] = np.asarray(outs[x])[O[:, x]]
    return new @ _radix_weights(s)


@lru_cache(maxsize=8)
def _group_table(s, party_swap=True, cap=DEFAULT_GROUP_CAP):
    order = group_order(s, party_swap)
    nv = outcome_table(s).shape[0]
    if order * nv > cap:
        raise ResourceError(f"group order {order} x {nv} vertices exceeds cap {cap}",
                            limit=cap, observed=order * nv)
    elems = group_elements(s, party_swap)
    perms = np.stack([vertex_permutation(g, s) for g in elems]).astype(np.int32)
    perms.setflags(write=False)
    return elems, perms


@lru_cache(maxsize=32)
def _affine_basis(s):
    """Affinely spanning vertex indices and the exact inverse of their [1, v] rows."""
    V = vertex_matrix(s)
    rows = [[1] + V[k].tolist() for k in range(V.shape[0])]
    idx = linalg.independent_rows(rows, limit=cg_dimension(s) + 1)
    return tuple(idx), linalg.inverse([rows[k] for k in idx])


def functional_values(q):
    """Values of ``coeffs . v - bound`` on every vertex (all <= 0 for valid q)."""
    return np.asarray(q.vertex_values(), dtype=np.int64) - q.bound


def inequality_from_values(s, values, label=None):
    """Rebuild ``coeffs . v <= bound`` from its affine values on all vertices."""
    idx, inv = _affine_basis(s)
    sol = linalg.matvec(inv, [int(values[k]) for k in idx])  # [constant, coeffs...]
    if any(x.denominator != 1 for x in sol):
        raise ArithmeticError("vertex values are not an integer affine function")
    const, coeffs = int(sol[0]), [int(x) for x in sol[1:]]
    q = Inequality.normalized(s, coeffs, -const, label)
    check = functional_values(Inequality(s, tuple(coeffs), -const))
    if not np.array_equal(check, np.asarray(values, dtype=np.int64)):
        raise ArithmeticError("values are not affine on the vertex set")
    return q


def act_on_inequality(g, q):
    s = q.scenario
    g.check(s)
    f = functional_values(q)
    perm = vertex_permutation(g, s)
    out = np.empty_like(f)
    out[perm] = f
    return inequality_from_values(s, out, q.label)


def _orbit_values(q, party_swap=True):
    s = q.scenario
    _, perms = _group_table(s, party_swap)
    f = functional_values(q)
    if f.max() > 0:
        raise InvalidInequality(f"inequality is violated by a vertex (value {int(f.max())})")
    out = np.empty((perms.shape[0], f.shape[0]), dtype=np.int64)
    np.put_along_axis(out, perms.astype(np.int64), np.broadcast_to(f, out.shape), axis=1)
    return out


def _lexmin_row(M):
    cand = np.arange(M.shape[0])
    for col in range(M.shape[1]):
        vals = M[cand, col]
        cand = cand[vals == vals.min()]
        if len(cand) == 1:
            break
    return int(cand[0])


def canonical_form(q, party_swap=True):
    """Orbit representative whose vertex-value vector is lexicographically smallest.

    The vertex-value vector is ``coeffs . v - bound`` over the lexicographic
    vertex list; it determines the inequality, so no further tie-break is
    needed.
    """
    M = _orbit_values(q, party_swap)
    return inequality_from_values(q.scenario, M[_lexmin_row(M)], q.label)


def orbit(q, party_swap=True):
    """All distinct images of ``q``, sorted."""
    M = np.unique(_orbit_values(q, party_swap), axis=0)
    return sorted((inequality_from_values(q.scenario, row) for row in M), key=Inequality.sort_key)


def equivalent(p, q, party_swap=True):
    return p.scenario == q.scenario and canonical_form(p, party_swap) == canonical_form(q, party_swap)


def transpose(q):
    """Exchange the roles of A and B: scenario (mA, mB, nA, nB) -> (mB, mA, nB, nA)."""
    s = q.scenario
    t = s.transposed()
    coeffs = [0] * len(q.coeffs)
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        coeffs[t.b_index(iA, jA)] = q.coeffs[s.a_index(iA, jA)]
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        coeffs[t.a_index(iB, jB)] = q.coeffs[s.b_index(iB, jB)]
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        coeffs[t.joint_index(iB, iA, jB, jA)] = q.coeffs[s.joint_index(iA, iB, jA, jB)]
    return Inequality(t, tuple(coeffs), q.bound, q.label)


# classification -------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitClass:
    canonical: Inequality
    size: int
    label: str
    members: tuple   # indices into the classified facet list


@dataclass(frozen=True)
class OrbitReport:
    scenario: object
    classes: tuple
    group_order: int

    @property
    def total(self):
        return sum(c.size for c in self.classes)

    def sizes(self):
        """Orbit sizes in class order."""
        return [c.size for c in self.classes]

    def family_sizes(self):
        """Total size per label; strict orbits sharing a family name are pooled."""
        out = {}
        for c in self.classes:
            out[c.label] = out.get(c.label, 0) + c.size
        return out


def classify_orbits(facets, labeler=None, party_swap=True):
    """Partition facets into relabelling orbits.

    ``labeler`` maps a canonical inequality to a name (or ``None``); classes
    without a name are labelled ``class-<k>``.
    """
    facets = list(facets)
    if not facets:
        raise ValueError("nothing to classify")
    s = facets[0].scenario
    if any(q.scenario != s for q in facets):
        raise IncompatibleScenario("facets come from different scenarios")
    keyed = {}
    for i, q in enumerate(facets):
        keyed.setdefault(functional_values(q).tobytes(), []).append(i)
    assigned = [False] * len(facets)
    found = []
    for i, q in enumerate(facets):
        if assigned[i]:
            continue
        M = np.unique(_orbit_values(q, party_swap), axis=0)
        canon = inequality_from_values(s, M[_lexmin_row(M)])
        members = []
        for row in M:
            for j in keyed.get(row.tobytes(), ()):
                assigned[j] = True
                members.append(j)
        found.append((canon, int(M.shape[0]), tuple(sorted(members))))
    found.sort(key=lambda c: c[0].sort_key())
    classes = []
    for k, (canon, size, members) in enumerate(found):
        name = labeler(canon) if labeler else None
        name = name or f"class-{k}"
        classes.append(OrbitClass(canon.with_label(name), size, name, members))
    return OrbitReport(s, tuple(classes), group_order(s, party_swap))
