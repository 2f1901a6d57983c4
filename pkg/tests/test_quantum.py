from math import sqrt

import numpy as np
import pytest
from scipy.optimize import minimize

from bellscope.catalog import make
from bellscope.errors import NonConvergence, ParameterOutOfRange, ShapeMismatch
from bellscope.quantum import (DensityMatrix, MeasurementSet, bell_operator, bloch_projectors,
                               born_table, expectation, horodecki_chsh, isotropic_qutrit,
                               partial_trace, planar_singlet_angles, rho_theta, seesaw_maximize,
                               sharing_state, sigma_state, singlet, state_catalog, werner)
from bellscope.scenario import full_to_cg

TSIRELSON = 1 / sqrt(2) - 1 / 2


def _random_state(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return m / np.trace(m)


def _random_measurements(rng, m, n, d):
    out = []
    for _ in range(m):
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        cut = sorted(rng.integers(0, d + 1, size=n - 1))
        bounds = [0] + list(cut) + [d]
        out.append([q[:, a:b] @ q[:, a:b].conj().T for a, b in zip(bounds, bounds[1:])])
    return out


@pytest.mark.parametrize("family,dims", [("I3322", (2, 2)), ("I2233", (3, 3)), ("I3422_2", (2, 3))])
def test_operator_matches_born_rule(family, dims):
    q = make(family)
    s = q.scenario
    rng = np.random.default_rng(7)
    for _ in range(3):
        rho = DensityMatrix(_random_state(rng, dims[0] * dims[1]), dims)
        M = MeasurementSet(_random_measurements(rng, s.mA, s.nA, dims[0]),
                           _random_measurements(rng, s.mB, s.nB, dims[1])).check()
        v = full_to_cg(s, born_table(s, rho, M), tol=1e-10)
        assert abs(q.value(v) - expectation(q, rho, M)) < 1e-10


def test_commuting_measurements_stay_classical():
    q = make("CHSH")
    z = bloch_projectors(0.0, 0.0)
    M = MeasurementSet([z, z], [z, z])
    rng = np.random.default_rng(1)
    for _ in range(5):
        assert expectation(q, DensityMatrix(_random_state(rng, 4), (2, 2)), M) <= 1e-12


def test_planar_angles_on_singlet():
    assert abs(expectation(make("I3322"), singlet(), planar_singlet_angles()) - 0.25) < 1e-9


def test_horodecki_values():
    assert abs(horodecki_chsh(singlet()) - TSIRELSON) < 1e-12
    assert abs(horodecki_chsh(np.eye(4) / 4) + 0.5) < 1e-12
    assert horodecki_chsh(sigma_state()) < 0
    with pytest.raises(ShapeMismatch):
        horodecki_chsh(np.eye(9) / 9)


def test_horodecki_agrees_with_direct_optimisation():
    """Oracle: maximise CHSH over four Bloch directions with BFGS."""
    q = make("CHSH")
    rng = np.random.default_rng(3)
    for _ in range(3):
        rho = DensityMatrix(_random_state(rng, 4), (2, 2))

        def f(x):
            M = MeasurementSet([bloch_projectors(x[0], x[1]), bloch_projectors(x[2], x[3])],
                               [bloch_projectors(x[4], x[5]), bloch_projectors(x[6], x[7])])
            return -expectation(q, rho, M)

        best = max(-minimize(f, rng.uniform(0, 2 * np.pi, 8), method="BFGS").fun
                   for _ in range(20))
        assert abs(best - horodecki_chsh(rho)) < 1e-6


def test_seesaw_chsh_and_monotone_history():
    res = seesaw_maximize(make("CHSH"), (2, 2), restarts=5, seed=11)
    assert abs(res.value - TSIRELSON) < 1e-8
    assert all(b >= a - 1e-12 for a, b in zip(res.history, res.history[1:]))
    res.measurements.check()


def test_seesaw_is_seed_deterministic_across_threads():
    q = make("I3322")
    a = seesaw_maximize(q, (2, 2), restarts=6, seed=4, threads=1)
    b = seesaw_maximize(q, (2, 2), restarts=6, seed=4, threads=3)
    assert a.value == b.value and a.restart == b.restart


def test_seesaw_many_outcomes_is_monotone():
    res = seesaw_maximize(make("I2233"), (3, 3), restarts=3, seed=2)
    assert res.value > 0
    assert all(b >= a - 1e-10 for a, b in zip(res.history, res.history[1:]))
    res.measurements.check()


def test_seesaw_fixed_state_and_errors():
    q = make("CHSH")
    res = seesaw_maximize(q, (2, 2), restarts=3, seed=0, state=werner(0.5))
    assert res.value <= 1e-9
    with pytest.raises(ParameterOutOfRange):
        seesaw_maximize(q, (1, 2))
    with pytest.raises(ParameterOutOfRange):
        seesaw_maximize(q, (2, 2), restarts=0)
    with pytest.raises(NonConvergence) as exc:
        seesaw_maximize(make("I3322"), (2, 2), restarts=2, seed=0, cap=1)
    assert exc.value.result is not None


def test_degenerate_measurements_reach_chsh_on_i3322():
    # I3322 with two settings fixed deterministically is CHSH, so its optimum
    # is at least the CHSH optimum on any state
    for p in (0.75, 0.9):
        rho = werner(p)
        chsh = seesaw_maximize(make("CHSH"), (2, 2), restarts=10, seed=1, state=rho).value
        i3322 = seesaw_maximize(make("I3322"), (2, 2), restarts=10, seed=1, state=rho).value
        assert i3322 >= chsh - 1e-8


def test_states():
    assert np.allclose(werner(1).matrix, singlet().matrix)
    assert np.allclose(werner(0).matrix, np.eye(4) / 4)
    assert np.allclose(isotropic_qutrit(0).matrix, np.eye(9) / 9)
    with pytest.raises(ParameterOutOfRange):
        werner(1.5)
    with pytest.raises(ParameterOutOfRange):
        state_catalog("nope")
    assert state_catalog("werner", 0.3).dims == (2, 2)


@pytest.mark.parametrize("theta", [0.2, np.pi / 4, 1.3])
def test_rho_theta_sits_on_chsh_boundary(theta):
    assert abs(horodecki_chsh(rho_theta(theta))) < 1e-8


def test_partial_trace():
    rng = np.random.default_rng(0)
    a, b = _random_state(rng, 2), _random_state(rng, 3)
    prod = DensityMatrix(np.kron(a, b), (2, 3))
    assert np.allclose(partial_trace(prod, [0]).matrix, a)
    assert np.allclose(partial_trace(prod, [1]).matrix, b)
    psi = sharing_state()
    ab, ac = partial_trace(psi, [0, 1]), partial_trace(psi, [0, 2])
    assert np.allclose(ab.matrix, ac.matrix)
    assert abs(np.trace(ab.matrix) - 1) < 1e-12
    with pytest.raises(ShapeMismatch):
        partial_trace(psi, [0], dims=(2, 2))


def test_density_matrix_validation():
    with pytest.raises(ParameterOutOfRange):
        DensityMatrix(np.diag([1.5, -0.5]), (2,))
    with pytest.raises(ParameterOutOfRange):
        DensityMatrix(np.eye(2), (2,))
    with pytest.raises(ShapeMismatch):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_bell_operator_shape_errors():
    M = planar_singlet_angles()
    with pytest.raises(ShapeMismatch):
        bell_operator(make("I3322"), MeasurementSet(M.a[:2], M.b))
