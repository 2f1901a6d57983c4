"""Bell scenarios and the minimal CG coordinate system.

A no-signalling behaviour ``P(jA, jB | iA, iB)`` is described by the joint
probabilities for all but the last outcome of each party plus the one-party
marginals for all but the last outcome. The CG vector stores, in order:

* A marginals ``P(jA|iA)``, ``iA`` outer, ``jA = 0..nA-2`` inner;
* B marginals ``P(jB|iB)`` likewise;
* joints ``P(jA, jB|iA, iB)`` ordered ``iA, iB, jA, jB`` (last fastest).

Indices are 0-based internally. Full tables are numpy arrays of shape
``(mA, mB, nA, nB)`` indexed ``[iA, iB, jA, jB]``.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import NormalizationError, ParameterOutOfRange, ShapeMismatch, SignallingError


@dataclass(frozen=True, order=True)
class Scenario:
    mA: int
    mB: int
    nA: int
    nB: int

    def __post_init__(self):
        if self.mA < 1 or self.mB < 1:
            raise ParameterOutOfRange(f"need at least one setting per party, got {self}")
        if self.nA < 2 or self.nB < 2:
            raise ParameterOutOfRange(f"need at least two outcomes per setting, got {self}")

    @classmethod
    def parse(cls, text):
        """Accept ``"3,3,2,2"``, ``"3 3 2 2"`` or the compact ``"3322"``."""
        text = text.strip()
        if "," in text or " " in text:
            parts = [int(p) for p in text.replace(",", " ").split()]
        else:
            parts = [int(c) for c in text]
        if len(parts) != 4:
            raise ValueError(f"scenario needs four counts, got {text!r}")
        return cls(*parts)

    @property
    def name(self):
        return f"{self.mA}{self.mB}{self.nA}{self.nB}"

    @property
    def dimension(self):
        return cg_dimension(self)

    @property
    def symmetric(self):
        return self.mA == self.mB and self.nA == self.nB

    def transposed(self):
        return Scenario(self.mB, self.mA, self.nB, self.nA)

    # coordinate indexing ------------------------------------------------

    def a_index(self, iA, jA):
        return iA * (self.nA - 1) + jA

    def b_index(self, iB, jB):
        return self.mA * (self.nA - 1) + iB * (self.nB - 1) + jB

    def joint_index(self, iA, iB, jA, jB):
        off = self.mA * (self.nA - 1) + self.mB * (self.nB - 1)
        return off + ((iA * self.mB + iB) * (self.nA - 1) + jA) * (self.nB - 1) + jB

    def coordinate_labels(self):
        """Human-readable label per CG coordinate (1-based settings)."""
        labels = []
        for iA, jA in product(range(self.mA), range(self.nA - 1)):
            labels.append(f"P({jA}|A{iA + 1})")
        for iB, jB in product(range(self.mB), range(self.nB - 1)):
            labels.append(f"P({jB}|B{iB + 1})")
        for iA, iB, jA, jB in product(range(self.mA), range(self.mB),
                                      range(self.nA - 1), range(self.nB - 1)):
            labels.append(f"P({jA},{jB}|A{iA + 1},B{iB + 1})")
        return labels

    def __str__(self):
        return self.name


def cg_dimension(s):
    return (s.mA * s.mB * (s.nA - 1) * (s.nB - 1)
            + s.mA * (s.nA - 1) + s.mB * (s.nB - 1))


@dataclass(frozen=True)
class CGVector:
    scenario: Scenario
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != cg_dimension(self.scenario):
            raise ShapeMismatch(
                f"CG vector for {self.scenario} needs {cg_dimension(self.scenario)} "
                f"coordinates, got {len(self.coords)}")

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, k):
        return self.coords[k]

    def dot(self, coeffs):
        return sum(c * x for c, x in zip(coeffs, self.coords))


# affine expansions ---------------------------------------------------------
#
# Every full-table entry and every marginal is an affine function of the CG
# coordinates. Each helper returns (terms, constant) with terms a dict
# {coordinate index: integer coefficient}.

def marginal_a_expansion(s, iA, jA):
    if jA < s.nA - 1:
        return {s.a_index(iA, jA): 1}, 0
    return {s.a_index(iA, j): -1 for j in range(s.nA - 1)}, 1


def marginal_b_expansion(s, iB, jB):
    if jB < s.nB - 1:
        return {s.b_index(iB, jB): 1}, 0
    return {s.b_index(iB, j): -1 for j in range(s.nB - 1)}, 1


def joint_expansion(s, iA, iB, jA, jB):
    """CG expansion of the full-table entry P(jA, jB | iA, iB)."""
    lastA = jA == s.nA - 1
    lastB = jB == s.nB - 1
    if not lastA and not lastB:
        return {s.joint_index(iA, iB, jA, jB): 1}, 0
    terms = {}
    if lastA and not lastB:
        # P(n-1, jB) = P(jB|iB) - sum_{a<n-1} P(a, jB)
        terms[s.b_index(iB, jB)] = 1
        for a in range(s.nA - 1):
            terms[s.joint_index(iA, iB, a, jB)] = -1
        return terms, 0
    if lastB and not lastA:
        terms[s.a_index(iA, jA)] = 1
        for b in range(s.nB - 1):
            terms[s.joint_index(iA, iB, jA, b)] = -1
        return terms, 0
    # both last: 1 - sum_a P(a|iA) - sum_b P(b|iB) + sum_{a,b} P(a,b)
    for a in range(s.nA - 1):
        terms[s.a_index(iA, a)] = -1
    for b in range(s.nB - 1):
        terms[s.b_index(iB, b)] = -1
    for a in range(s.nA - 1):
        for b in range(s.nB - 1):
            terms[s.joint_index(iA, iB, a, b)] = 1
    return terms, 1


def _eval(terms, const, coords):
    return const + sum(c * coords[k] for k, c in terms.items())


# conversions ----------------------------------------------------------------

def _close(x, y, tol):
    return x == y if tol == 0 else abs(x - y) <= tol


def full_to_cg(s, full, tol=0):
    """Map a full no-signalling table onto CG coordinates.

    With the default ``tol=0`` all checks are exact (use ``Fraction`` or
    integer entries); pass a positive tolerance for floating-point tables.
    """
    full = np.asarray(full, dtype=object if tol == 0 else float)
    if full.shape != (s.mA, s.mB, s.nA, s.nB):
        raise ShapeMismatch(f"expected table shape {(s.mA, s.mB, s.nA, s.nB)}, got {full.shape}")
    for iA, iB in product(range(s.mA), range(s.mB)):
        total = sum(full[iA, iB].ravel().tolist())
        if not _close(total, 1, tol):
            raise NormalizationError(
                f"setting pair (A{iA + 1}, B{iB + 1}) sums to {total}, not 1")
    a_marg = [[sum(full[iA, iB, jA, :].tolist()) for jA in range(s.nA)]
              for iA in range(s.mA) for iB in range(s.mB)]
    for iA in range(s.mA):
        ref = a_marg[iA * s.mB]
        for iB in range(1, s.mB):
            other = a_marg[iA * s.mB + iB]
            if not all(_close(x, y, tol) for x, y in zip(ref, other)):
                raise SignallingError(
                    f"marginal of A{iA + 1} depends on B's setting (B1 vs B{iB + 1})")
    b_marg = [[sum(full[iA, iB, :, jB].tolist()) for jB in range(s.nB)]
              for iA in range(s.mA) for iB in range(s.mB)]
    for iB in range(s.mB):
        ref = b_marg[iB]
        for iA in range(1, s.mA):
            other = b_marg[iA * s.mB + iB]
            if not all(_close(x, y, tol) for x, y in zip(ref, other)):
                raise SignallingError(
                    f"marginal of B{iB + 1} depends on A's setting (A1 vs A{iA + 1})")
    coords = [0] * cg_dimension(s)
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        coords[s.a_index(iA, jA)] = a_marg[iA * s.mB][jA]
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        coords[s.b_index(iB, jB)] = b_marg[iB][jB]
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        coords[s.joint_index(iA, iB, jA, jB)] = full[iA, iB, jA, jB]
    return CGVector(s, tuple(coords))


def cg_to_full(v):
    """Reconstruct the unique no-signalling table; entries may be negative."""
    s = v.scenario
    coords = v.coords
    exact = all(isinstance(x, (int, Fraction)) for x in coords)
    full = np.empty((s.mA, s.mB, s.nA, s.nB), dtype=object if exact else float)
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA), range(s.nB)):
        terms, const = joint_expansion(s, iA, iB, jA, jB)
        full[iA, iB, jA, jB] = _eval(terms, const, coords)
    return full


def uniform_behavior(s):
    """The maximally mixed behaviour: every joint outcome equally likely."""
    p = Fraction(1, s.nA * s.nB)
    full = np.full((s.mA, s.mB, s.nA, s.nB), p, dtype=object)
    return full_to_cg(s, full)
