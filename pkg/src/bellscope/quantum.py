"""Quantum values of Bell expressions: Bell operators, see-saw search, named states.

Conventions: the first tensor factor is party A (the column party of the
tables), measurement ``M.a[i][j]`` is the projector for outcome ``j`` of A's
setting ``i``. A qubit direction ``(azim, polar)`` is the Bloch vector
``(sin azim cos polar, sin azim sin polar, cos azim)`` with z along |0> and
x along |0>+|1>; outcome 0 projects onto ``(I + n.sigma)/2``.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from math import sqrt

import numpy as np
from scipy.stats import unitary_group

from .errors import NonConvergence, ParameterOutOfRange, ShapeMismatch

PAULI = (np.array([[0, 1], [1, 0]], dtype=complex),
         np.array([[0, -1j], [1j, 0]], dtype=complex),
         np.array([[1, 0], [0, -1]], dtype=complex))

DEFAULT_RESTARTS = 50
ITERATION_CAP = 500
CONVERGENCE_STEP = 1e-10
CONVERGENCE_SWEEPS = 3

log = logging.getLogger(__name__)


# states -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = int(np.prod(self.dims))
        if m.shape != (d, d):
            raise ShapeMismatch(f"matrix of shape {m.shape} does not match dims {self.dims}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ParameterOutOfRange("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-12:
            raise ParameterOutOfRange(f"density matrix has trace {np.trace(m).real}")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ParameterOutOfRange("density matrix is not positive semidefinite")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi, dims):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)


def _projector(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def singlet():
    return DensityMatrix(_projector([0, 1, -1, 0]), (2, 2))


def sigma_state(weight=0.85):
    """``weight * P_phi + (1 - weight) * P_01`` with ``phi = (2|00> + |11>)/sqrt 5``."""
    if not 0 <= weight <= 1:
        raise ParameterOutOfRange("weight must lie in [0, 1]")
    m = weight * _projector([2, 0, 0, 1]) + (1 - weight) * _projector([0, 1, 0, 0])
    return DensityMatrix(m, (2, 2))


def werner(p):
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"Werner weight {p} outside [0, 1]")
    return DensityMatrix(p * _projector([0, 1, -1, 0]) + (1 - p) * np.eye(4) / 4, (2, 2))


def isotropic_qutrit(p):
    if not 0 <= p <= 1:
        raise ParameterOutOfRange(f"isotropic weight {p} outside [0, 1]")
    psi = np.zeros(9)
    psi[[0, 4, 8]] = 1
    return DensityMatrix(p * _projector(psi) + (1 - p) * np.eye(9) / 9, (3, 3))


def _theta_mix(theta, lam):
    pure = _projector([np.cos(theta), 0, 0, np.sin(theta)])
    return lam * pure + (1 - lam) * _projector([0, 1, 0, 0])


def chsh_boundary_weight(theta, tol=1e-12):
    """Weight ``lam`` that puts ``_theta_mix(theta, lam)`` on the CHSH boundary.

    The maximal CHSH value grows monotonically with ``lam`` here, so plain
    bisection suffices.
    """
    if not 0 < theta < np.pi / 2:
        raise ParameterOutOfRange("theta must lie in (0, pi/2)")
    lo, hi = 0.0, 1.0
    if _horodecki(_theta_mix(theta, hi)) <= 0:
        raise ParameterOutOfRange(f"the theta={theta} family never violates CHSH")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _horodecki(_theta_mix(theta, mid)) > 0:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def rho_theta(theta):
    return DensityMatrix(_theta_mix(theta, chsh_boundary_weight(theta)), (2, 2))


def sharing_state(mu=0.852):
    """Pure three-qubit state ``mu|000> + r(|110> + |101>)`` (qubit order A, B, C)."""
    if not 0 <= mu <= 1:
        raise ParameterOutOfRange("mu must lie in [0, 1]")
    psi = np.zeros(8)
    r = sqrt((1 - mu ** 2) / 2)
    psi[0b000], psi[0b110], psi[0b101] = mu, r, r
    return DensityMatrix.pure(psi, (2, 2, 2))


_CATALOG = {
    "singlet": singlet,
    "sigma": sigma_state,
    "werner": werner,
    "rho_theta": rho_theta,
    "isotropic_qutrit": isotropic_qutrit,
    "sharing": sharing_state,
}


def state_catalog(name, *params):
    try:
        make = _CATALOG[name]
    except KeyError:
        raise ParameterOutOfRange(f"unknown state {name!r}; known: {sorted(_CATALOG)}") from None
    return make(*params)


def partial_trace(rho, keep, dims=None):
    """Reduced state on the subsystems listed in ``keep`` (in their original order)."""
    dims = tuple(dims or rho.dims)
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if int(np.prod(dims)) != m.shape[0]:
        raise ShapeMismatch(f"dims {dims} do not match a {m.shape[0]}-dimensional state")
    keep = sorted(keep)
    n = len(dims)
    if any(not 0 <= k < n for k in keep):
        raise ShapeMismatch(f"subsystem index out of range in {keep}")
    t = m.reshape(dims + dims)
    drop = [k for k in range(n) if k not in keep]
    # trace pairs from the highest index down so earlier axes keep their position
    for k in sorted(drop, reverse=True):
        t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
    kd = tuple(dims[k] for k in keep)
    d = int(np.prod(kd))
    return DensityMatrix(t.reshape(d, d), kd)


# measurements ----------------------------------------------------------------------

def bloch_projectors(azim, polar):
    """Two-outcome qubit measurement along the given direction."""
    n = (np.sin(azim) * np.cos(polar), np.sin(azim) * np.sin(polar), np.cos(azim))
    p0 = (np.eye(2) + sum(c * s for c, s in zip(n, PAULI))) / 2
    return [p0, np.eye(2) - p0]


@dataclass(eq=False)
class MeasurementSet:
    a: list   # a[iA][jA] projector
    b: list

    def check(self, tol=1e-10):
        for party in (self.a, self.b):
            for proj in party:
                d = proj[0].shape[0]
                if np.abs(sum(proj) - np.eye(d)).max() > tol:
                    raise ShapeMismatch("projectors do not sum to the identity")
                for p in proj:
                    if np.abs(p @ p - p).max() > tol or np.abs(p - p.conj().T).max() > tol:
                        raise ShapeMismatch("measurement operator is not an orthogonal projector")
        return self

    @property
    def dims(self):
        return self.a[0][0].shape[0], self.b[0][0].shape[0]

    @classmethod
    def from_angles(cls, a_angles, b_angles):
        return cls([bloch_projectors(*t) for t in a_angles], [bloch_projectors(*t) for t in b_angles])

    def bloch_vectors(self):
        """Outcome-0 Bloch vectors per setting (qubits only)."""
        out = []
        for party in (self.a, self.b):
            out.append([[float(np.trace(p[0] @ s).real) for s in PAULI] for p in party])
        return out


def _check_shape(q, M):
    s = q.scenario
    if len(M.a) != s.mA or len(M.b) != s.mB or any(len(p) != s.nA for p in M.a) \
            or any(len(p) != s.nB for p in M.b):
        raise ShapeMismatch(f"measurements do not match scenario {s}")


@dataclass(frozen=True, eq=False)
class BellOperator:
    scenario: object
    matrix: np.ndarray


def bell_operator(q, M):
    """Operator whose expectation is the CG expression (without the bound)."""
    _check_shape(q, M)
    s = q.scenario
    dA, dB = M.dims
    IA, IB = np.eye(dA), np.eye(dB)
    B = np.zeros((dA * dB, dA * dB), dtype=complex)
    for iA, jA in product(range(s.mA), range(s.nA - 1)):
        c = q.coeffs[s.a_index(iA, jA)]
        if c:
            B += c * np.kron(M.a[iA][jA], IB)
    for iB, jB in product(range(s.mB), range(s.nB - 1)):
        c = q.coeffs[s.b_index(iB, jB)]
        if c:
            B += c * np.kron(IA, M.b[iB][jB])
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA - 1), range(s.nB - 1)):
        c = q.coeffs[s.joint_index(iA, iB, jA, jB)]
        if c:
            B += c * np.kron(M.a[iA][jA], M.b[iB][jB])
    return BellOperator(s, (B + B.conj().T) / 2)


def expectation(q, rho, M):
    m = rho.matrix if isinstance(rho, DensityMatrix) else rho
    return float(np.trace(bell_operator(q, M).matrix @ m).real)


def born_table(s, rho, M):
    """Full behaviour table ``[iA, iB, jA, jB]`` produced by ``rho`` and ``M``."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else rho
    full = np.zeros((s.mA, s.mB, s.nA, s.nB))
    for iA, iB, jA, jB in product(range(s.mA), range(s.mB), range(s.nA), range(s.nB)):
        full[iA, iB, jA, jB] = np.trace(m @ np.kron(M.a[iA][jA], M.b[iB][jB])).real
    return full


# Horodecki criterion -------------------------------------------------------------

def _horodecki(m):
    T = np.array([[np.trace(m @ np.kron(si, sj)).real for sj in PAULI] for si in PAULI])
    ev = np.sort(np.linalg.eigvalsh(T.T @ T))[::-1]
    return (sqrt(max(ev[0] + ev[1], 0.0)) - 1) / 2


def horodecki_chsh(rho):
    """Maximal CHSH value in CG form, ``(sqrt(t1 + t2) - 1)/2``; positive iff violated."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if m.shape != (4, 4):
        raise ShapeMismatch("the Horodecki criterion needs a two-qubit state")
    return _horodecki(m)


# see-saw ---------------------------------------------------------------------------

@dataclass
class SeesawResult:
    value: float
    state: DensityMatrix
    measurements: MeasurementSet
    converged: bool
    iterations: int
    restart: int
    history: list = field(repr=False, default_factory=list)


def _local_operators(q, rho, other, party, dims):
    """Conditional operators ``K[i][j]`` with ``<B> = sum Tr(Pi_ij K_ij) + const``."""
    s = q.scenario
    dA, dB = dims
    r = rho.reshape(dA, dB, dA, dB)
    m_self, n_self = (s.mA, s.nA) if party == "a" else (s.mB, s.nB)
    K = [[np.zeros((dA, dA) if party == "a" else (dB, dB), dtype=complex)
          for _ in range(n_self)] for _ in range(m_self)]
    for i, j in product(range(m_self), range(n_self - 1)):
        if party == "a":
            G = q.coeffs[s.a_index(i, j)] * np.eye(dB, dtype=complex)
            for iB, jB in product(range(s.mB), range(s.nB - 1)):
                c = q.coeffs[s.joint_index(i, iB, j, jB)]
                if c:
                    G = G + c * other[iB][jB]
            # Tr_B[rho (I x G)] as an operator on A
            K[i][j] = np.einsum("abcd,db->ac", r, G)
        else:
            G = q.coeffs[s.b_index(i, j)] * np.eye(dA, dtype=complex)
            for iA, jA in product(range(s.mA), range(s.nA - 1)):
                c = q.coeffs[s.joint_index(iA, i, jA, j)]
                if c:
                    G = G + c * other[iA][jA]
            K[i][j] = np.einsum("abcd,ca->bd", r, G)
    return K


def _update_setting(K, proj, rank_one):
    """Improve one projective measurement for the linear objective ``sum Tr(Pi_j K_j)``."""
    n = len(K)
    d = K[0].shape[0]
    Ks = [(k + k.conj().T) / 2 for k in K]
    if n == 2:
        w, v = np.linalg.eigh(Ks[0] - Ks[1])
        if rank_one and d == 2:
            cols = v[:, [1]]
        else:
            cols = v[:, w > 0]
        p0 = cols @ cols.conj().T
        return [p0, np.eye(d) - p0]
    # n > 2: basis vectors with an outcome assignment, improved by
    # alternating argmax assignment and a polar-factor (MM) basis step
    basis, assign = [], []
    for j, p in enumerate(proj):
        w, v = np.linalg.eigh((p + p.conj().T) / 2)
        for k in range(d):
            if w[k] > 0.5:
                basis.append(v[:, k])
                assign.append(j)
    U = np.array(basis).T
    assign = np.array(assign)
    shift = max(0.0, -min(np.linalg.eigvalsh(k).min() for k in Ks)) + 1.0
    for _ in range(20):
        if not rank_one:
            vals = np.array([[np.vdot(U[:, k], Kj @ U[:, k]).real for Kj in Ks] for k in range(d)])
            assign = vals.argmax(axis=1)
        G = np.column_stack([(Ks[assign[k]] + shift * np.eye(d)) @ U[:, k] for k in range(d)])
        W, _, Vh = np.linalg.svd(G)
        U_new = W @ Vh
        if np.abs(U_new - U).max() < 1e-13:
            U = U_new
            break
        U = U_new
    out = [np.zeros((d, d), dtype=complex) for _ in range(n)]
    for k in range(d):
        out[assign[k]] += np.outer(U[:, k], U[:, k].conj())
    return out


def _random_measurements(rng, m, n, d, degenerate):
    out = []
    for _ in range(m):
        U = unitary_group.rvs(d, random_state=rng) if d > 1 else np.eye(1)
        proj = [np.zeros((d, d), dtype=complex) for _ in range(n)]
        for k in range(d):
            j = min(k, n - 1) if not degenerate or d <= n else int(rng.integers(n))
            proj[j] += np.outer(U[:, k], U[:, k].conj())
        out.append(proj)
    return out


def _top_state(B):
    w, v = np.linalg.eigh(B)
    return np.outer(v[:, -1], v[:, -1].conj())


def _run(q, dims, seed, restart, state, rank_one, cap):
    s = q.scenario
    rng = np.random.default_rng([seed, restart])
    dA, dB = dims
    M = MeasurementSet(_random_measurements(rng, s.mA, s.nA, dA, not rank_one),
                       _random_measurements(rng, s.mB, s.nB, dB, not rank_one))
    rho = state.matrix if state is not None else _top_state(bell_operator(q, M).matrix)
    value = float(np.trace(bell_operator(q, M).matrix @ rho).real)
    history = [value]
    quiet = 0
    converged = False
    it = 0
    for it in range(1, cap + 1):
        K = _local_operators(q, rho, M.b, "a", dims)
        M.a = [_update_setting(K[i], M.a[i], rank_one) for i in range(s.mA)]
        K = _local_operators(q, rho, M.a, "b", dims)
        M.b = [_update_setting(K[i], M.b[i], rank_one) for i in range(s.mB)]
        B = bell_operator(q, M).matrix
        if state is None:
            rho = _top_state(B)
        new = float(np.trace(B @ rho).real)
        history.append(new)
        quiet = quiet + 1 if new - value < CONVERGENCE_STEP else 0
        value = max(value, new)
        if quiet >= CONVERGENCE_SWEEPS:
            converged = True
            break
    rho_out = state if state is not None else DensityMatrix((rho + rho.conj().T) / 2, dims)
    return SeesawResult(value, rho_out, M, converged, it, restart, history)


def seesaw_maximize(q, dims=(2, 2), restarts=DEFAULT_RESTARTS, seed=0, state=None,
                    rank_one=False, threads=None, cap=ITERATION_CAP):
    """Maximise ``Tr(B rho)`` by alternating local updates; best of ``restarts`` runs.

    With ``state`` given only the measurements are optimised. ``rank_one``
    keeps every projector one-dimensional (non-degenerate measurements when
    the local dimension equals the outcome count). Runs are seeded per
    restart, so the result does not depend on ``threads``.
    """
    dims = tuple(dims)
    if len(dims) != 2 or min(dims) < 2:
        raise ParameterOutOfRange("need two local dimensions >= 2")
    if restarts < 1:
        raise ParameterOutOfRange("need at least one restart")
    if state is not None and state.dims != dims:
        raise ShapeMismatch(f"state dims {state.dims} differ from {dims}")
    threads = threads or os.cpu_count() or 1
    job = lambda r: _run(q, dims, seed, r, state, rank_one, cap)  # noqa: E731
    if threads == 1:
        results = [job(r) for r in range(restarts)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(restarts)))
    best = min(results, key=lambda res: (-res.value, res.restart))
    if not any(res.converged for res in results):
        raise NonConvergence(f"no restart converged within {cap} sweeps; best {best.value:.12g}",
                             result=best)
    return best


# reference scenarios ---------------------------------------------------------------

def planar_singlet_angles():
    """The planar I3322 optimum on the singlet: settings in the x-z plane."""
    a = [(0.0, 0.0), (np.pi / 3, 0.0), (2 * np.pi / 3, 0.0)]
    b = [(4 * np.pi / 3, 0.0), (np.pi, 0.0), (2 * np.pi / 3, 0.0)]
    return MeasurementSet.from_angles(a, b)


ETA = float(np.arccos(1 / (2 * sqrt(2))))
CHI = float(np.arccos(sqrt(7 / 8)))


def sigma_angles():
    """The published measurement directions for the sigma-state violation, read literally."""
    a = [(ETA, 0.0), (np.pi - ETA, 0.0), (0.0, 0.0)]
    b = [(np.pi - CHI, 0.0), (CHI, 0.0), (np.pi, 0.0)]
    return MeasurementSet.from_angles(a, b)


SHARING_PARAMS = {"alpha": 2.8252, "beta": 0.1931, "delta": 0.0804, "gamma": 2.5445}


def sharing_angles(literal=False):
    """Measurement directions for the sharing state.

    The published table gives one list for "A" and one for "B". Read with
    the inequality's column party measuring the "B" list (first two
    settings exchanged) and the row party the "A" list, it reproduces the
    published value; ``literal=True`` returns the unmodified assignment.
    """
    al, be, de, ga = (SHARING_PARAMS[k] for k in ("alpha", "beta", "delta", "gamma"))
    list_a = [(al, 2 * np.pi - be), (al, np.pi - be), (np.pi / 2, 2 * np.pi - de)]
    list_b = [(ga, np.pi + de), (ga, de), (np.pi / 2, be)]
    if literal:
        return MeasurementSet.from_angles(list_a, list_b)
    return MeasurementSet.from_angles([list_b[1], list_b[0], list_b[2]], list_a)


def sharing_values(q, mu=0.852, M=None):
    """``(value on AB, value on AC)`` for the three-qubit sharing state."""
    psi = sharing_state(mu)
    M = M or sharing_angles()
    return (expectation(q, partial_trace(psi, [0, 1]), M),
            expectation(q, partial_trace(psi, [0, 2]), M))


def _best_effort(q, dims, restarts, seed, state, rank_one, threads):
    """See-saw for scans: slow tails near tiny violations keep the best value found."""
    try:
        return seesaw_maximize(q, dims, restarts, seed, state=state, rank_one=rank_one,
                               threads=threads)
    except NonConvergence as exc:
        log.warning("%s", exc)
        return exc.result


def violation_onset(q, family, dims, lo, hi, restarts=30, seed=0, tol=1e-3, eps=1e-7,
                    rank_one=False, threads=None):
    """Smallest mixing weight (to ``tol``) at which ``family(p)`` violates ``q``.

    Assumes the maximal violation is monotone in ``p`` with no violation at
    ``lo`` and a violation at ``hi``. ``eps`` guards against round-off.
    """
    def violated(p):
        res = _best_effort(q, dims, restarts, seed, family(p), rank_one, threads)
        return res.value - q.bound > eps

    if violated(lo) or not violated(hi):
        raise ParameterOutOfRange(f"onset not bracketed by [{lo}, {hi}]")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if violated(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def fig1_scan(thetas, restarts=DEFAULT_RESTARTS, seed=0, rank_one=True, threads=None):
    """Rows ``(theta, I~CHSH, I~3322)`` with the lhv maximum rescaled to 1.

    Measurements are non-degenerate by default, as in the published
    figure; with degenerate ones allowed I~3322 >= I~CHSH trivially.
    """
    from .catalog import make

    i3322 = make("I3322")
    rows = []
    for theta in thetas:
        rho = rho_theta(theta)
        c = 2 * horodecki_chsh(rho) + 1
        res = _best_effort(i3322, (2, 2), restarts, seed, rho, rank_one, threads)
        rows.append((float(theta), c, res.value + 1))
    return rows
