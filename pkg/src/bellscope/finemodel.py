"""Fine's explicit local model for (m, 2, 2, 2) behaviours.

Party A has ``m`` two-outcome settings, party B two. If a behaviour obeys
positivity and every CHSH facet, a joint distribution over all outcomes
``(a_1..a_m, b_1, b_2)`` reproducing it is built in closed form: first the
joint of ``B_1, B_2``, then for each ``A_i`` the triple ``(A_i, B_1, B_2)``,
and finally the product of the conditionals ``P(a_i | b_1, b_2)``.

Probabilities refer to outcome 0, e.g. ``P(A_i B_k) = P(a_i = 0, b_k = 0)``.
All arithmetic is exact.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product

from .errors import NotLocal, UnsupportedScenario
from .scenario import CGVector, Scenario


def _check_scenario(s):
    if s.mB != 2 or s.nA != 2 or s.nB != 2:
        raise UnsupportedScenario(f"the Fine construction needs an (m,2,2,2) scenario, got {s}")


def _exact(x):
    return x if isinstance(x, (int, Fraction)) else Fraction(x)


@dataclass(frozen=True)
class JointDistribution:
    scenario: Scenario
    probs: dict   # (a_1..a_m, b_1, b_2) -> Fraction

    def pair(self, iA, iB, jA, jB):
        """Marginal ``P(jA, jB | A_iA, B_iB)``."""
        m = self.scenario.mA
        return sum((p for k, p in self.probs.items() if k[iA] == jA and k[m + iB] == jB),
                   Fraction(0))

    def to_cg(self):
        s = self.scenario
        coords = [Fraction(0)] * s.dimension
        for iA in range(s.mA):
            coords[s.a_index(iA, 0)] = self.pair(iA, 0, 0, 0) + self.pair(iA, 0, 0, 1)
        for iB in range(2):
            coords[s.b_index(iB, 0)] = self.pair(0, iB, 0, 0) + self.pair(0, iB, 1, 0)
        for iA, iB in product(range(s.mA), range(2)):
            coords[s.joint_index(iA, iB, 0, 0)] = self.pair(iA, iB, 0, 0)
        return CGVector(s, tuple(coords))

    def is_valid(self):
        return all(p >= 0 for p in self.probs.values()) and sum(self.probs.values()) == 1


@lru_cache(maxsize=8)
def precondition_facets(s):
    """Positivity and CHSH facets of an (m,2,2,2) scenario, from the catalogue."""
    from .catalog import embed_settings, make, positivity
    from .symmetry import orbit

    _check_scenario(s)
    out = [positivity(s, iA, iB, jA, jB)
           for iA, iB, jA, jB in product(range(s.mA), range(2), range(2), range(2))]
    chsh = orbit(make("CHSH"))
    if s.mA == 1:
        return tuple(out)
    for pair in combinations(range(s.mA), 2):
        for q in chsh:
            out.append(embed_settings(q, s.mA, 2, pair).with_label("CHSH"))
    return tuple(dict.fromkeys(out))


def check_preconditions(behavior):
    """Return the first violated precondition facet and its value, or ``None``."""
    s = behavior.scenario
    coords = [_exact(x) for x in behavior.coords]
    for q in precondition_facets(s):
        v = q.value(coords)
        if v > q.bound:
            return q, v
    return None


def fine_model(behavior):
    """Joint distribution reproducing ``behavior``; raises ``NotLocal`` if a facet fails."""
    s = behavior.scenario
    _check_scenario(s)
    bad = check_preconditions(behavior)
    if bad is not None:
        q, v = bad
        raise NotLocal(f"behaviour violates {q.label or 'a facet'} ({v} > {q.bound})", facet=q, value=v)
    x = [_exact(c) for c in behavior.coords]
    m = s.mA
    pA = [x[s.a_index(i, 0)] for i in range(m)]
    pB = [x[s.b_index(k, 0)] for k in range(2)]
    pAB = [[x[s.joint_index(i, k, 0, 0)] for k in range(2)] for i in range(m)]

    beta = min([pB[0], pB[1]] + [pAB[i][k] + pB[1 - k] - pAB[i][1 - k]
                                 for i in range(m) for k in range(2)])
    pb = {(0, 0): beta, (0, 1): pB[0] - beta, (1, 0): pB[1] - beta,
          (1, 1): 1 - pB[0] - pB[1] + beta}
    _nonnegative("P(b1, b2)", pb)

    triples = []
    for i in range(m):
        alpha = min(pAB[i][0], pAB[i][1], beta,
                    beta - (pA[i] + pB[0] + pB[1] - pAB[i][0] - pAB[i][1] - 1))
        t = {
            (0, 0, 0): alpha,
            (0, 0, 1): pAB[i][0] - alpha,
            (0, 1, 0): pAB[i][1] - alpha,
            (0, 1, 1): pA[i] - pAB[i][0] - pAB[i][1] + alpha,
            (1, 0, 0): beta - alpha,
            (1, 0, 1): pB[0] - pAB[i][0] - beta + alpha,
            (1, 1, 0): pB[1] - pAB[i][1] - beta + alpha,
            (1, 1, 1): 1 - pA[i] - pB[0] - pB[1] + pAB[i][0] + pAB[i][1] + beta - alpha,
        }
        _nonnegative(f"P(a{i + 1}, b1, b2)", t)
        triples.append(t)

    probs = {}
    for b in product(range(2), repeat=2):
        w = pb[b]
        for a in product(range(2), repeat=m):
            p = Fraction(0)
            if w:
                # product of conditionals times P(b1, b2); empty cells stay zero
                p = Fraction(w)
                for i in range(m):
                    p *= Fraction(triples[i][(a[i],) + b], w)
            probs[a + b] = p
    return JointDistribution(s, probs)


def _nonnegative(name, table):
    for k, v in table.items():
        if v < 0:
            raise NotLocal(f"intermediate quantity {name}{k} = {v} is negative", value=v)


def certify_local(behavior):
    """``(True, JointDistribution)`` or ``(False, violated facet)``."""
    _check_scenario(behavior.scenario)
    try:
        return True, fine_model(behavior)
    except NotLocal as exc:
        return False, exc.facet
