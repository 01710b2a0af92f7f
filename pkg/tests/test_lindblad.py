import numpy as np
import pytest

from birkhoff_lab.core import matrix_units, partial_trace, projector, purity, tensor
from birkhoff_lab.errors import IntegratorError, PreconditionError
from birkhoff_lab.lindblad import (
    SIGMA_MINUS,
    LindbladParams,
    _integrate,
    damped_channel_at,
    default_dt_max,
    dephasing_coefficients,
    dephasing_coefficients_series,
    integrate_full,
    integrate_full_series,
    lindblad_rhs,
    liouvillian,
    purity_series,
)
from birkhoff_lab.model import ModelParams, channel_at, full_hamiltonian
from birkhoff_lab.random import rand_density, rand_state
from oracles import lindblad_expm_full


def random_lp(rng, gamma):
    om = rng.uniform(-1.5, 1.5, size=2)
    ka = rng.uniform(-1.5, 1.5, size=2)
    g = rng.uniform(-1.5, 1.5, size=3)
    return LindbladParams(ModelParams(om[0], om[1], ka[0], ka[1], tuple(g), rand_state(2, rng)), gamma)


def test_sign_convention():
    ground, excited = np.array([0, 1]), np.array([1, 0])
    assert np.allclose(SIGMA_MINUS @ excited, ground)
    assert np.allclose(SIGMA_MINUS @ ground, 0)


def test_rhs_reversible_is_commutator(rng):
    p = random_lp(rng, 0.0)
    rho = rand_density(8, rng)
    h = full_hamiltonian(p.model)
    assert np.array_equal(lindblad_rhs(p, rho), -1j * (h @ rho - rho @ h))


def test_rhs_pure_decay():
    p = LindbladParams(ModelParams(0, 0, 0, 0, (0, 0, 0)), 1.0)
    rho = tensor(np.eye(4) / 4, projector([1, 0]))
    d = lindblad_rhs(p, rho)
    red = partial_trace(d, [4, 2], {1})
    assert abs(np.trace(d)) <= 1e-13
    assert red[0, 0].real < 0 and red[1, 1].real > 0


def test_rhs_traceless_hermitian(rng):
    for gamma in (0.0, 0.3, 5.0):
        p = random_lp(rng, gamma)
        d = lindblad_rhs(p, rand_density(8, rng))
        assert abs(np.trace(d)) <= 1e-13
        assert np.max(np.abs(d - d.conj().T)) <= 1e-13


def test_liouvillian_matches_rhs(rng):
    p = random_lp(rng, 0.7)
    rho = rand_density(8, rng)
    assert np.allclose((liouvillian(p) @ rho.reshape(-1)).reshape(8, 8), lindblad_rhs(p, rho), atol=1e-13)


def test_integrate_full_t0(rng):
    p = random_lp(rng, 0.5)
    rho = rand_density(8, rng)
    assert np.array_equal(integrate_full(p, rho, 0.0), rho)


@pytest.mark.parametrize("gamma", [0.0, 0.4])
def test_integrate_full_matches_exact_propagator(rng, gamma):
    p = random_lp(rng, gamma)
    rho = rand_density(8, rng)
    got = integrate_full(p, rho, 2.0)
    ref = lindblad_expm_full(full_hamiltonian(p.model), gamma, rho, 2.0)
    assert np.max(np.abs(got - ref)) <= 1e-8


def test_overdamped_reservoir_relaxes_to_ground():
    p = LindbladParams(ModelParams(psi0=np.array([1.0, 0.0])), 50.0)
    rho = tensor(np.eye(4) / 4, projector([1, 0]))
    out = integrate_full(p, rho, 2.0)
    red = partial_trace(out, [4, 2], {1})
    # driven by Gamma_x = 1: residual excitation ~ 4 Gamma_x^2 / gamma^2
    assert abs(red[1, 1] - 1) <= 4 / 50**2 * 1.5
    undriven = LindbladParams(ModelParams(gamma_vec=(0, 0, 0.5), psi0=np.array([1.0, 0.0])), 50.0)
    red = partial_trace(integrate_full(undriven, rho, 2.0), [4, 2], {1})
    assert abs(red[1, 1] - 1) <= 1e-12


def test_full_trajectory_stays_physical(rng):
    p = random_lp(rng, 1.0)
    rho = rand_density(8, rng)
    outs = integrate_full_series(p, rho[None], np.linspace(0, 6, 25))[:, 0]
    for r in outs:
        assert abs(np.trace(r) - 1) <= 1e-8
        assert np.max(np.abs(r - r.conj().T)) <= 1e-12
        assert np.linalg.eigvalsh(r)[0] >= -1e-7


def test_coefficients_t0_and_reversible_limit(rng):
    p = random_lp(rng, 0.0)
    assert np.allclose(dephasing_coefficients(p, 0.0), np.ones((4, 4)))
    ts = np.linspace(0, 10, 11)
    cs = dephasing_coefficients_series(p, ts)
    for t, c in zip(ts, cs):
        assert np.max(np.abs(c - channel_at(p.model, t).gram)) <= 1e-8


def block_vs_full(p, ts):
    sigma = projector(p.model.psi0)
    units = matrix_units(4)
    full = integrate_full_series(p, np.array([np.kron(e, sigma) for e in units]), ts)
    ref = np.empty((len(ts), 4, 4), dtype=complex)
    for k, _ in enumerate(units):
        m, n = divmod(k, 4)
        for i in range(len(ts)):
            ref[i, m, n] = partial_trace(full[i, k], [4, 2], {0})[m, n]
    return np.max(np.abs(dephasing_coefficients_series(p, ts) - ref))


@pytest.mark.parametrize("gamma", [0.0, 0.1, 1.0])
def test_block_integrator_matches_full_tomography(rng, gamma):
    assert block_vs_full(random_lp(rng, gamma), np.array([0.5, 3.0, 10.0])) <= 1e-8


def test_coefficient_invariants(rng):
    for gamma in (0.05, 0.5, 2.0):
        p = random_lp(rng, gamma)
        for c in dephasing_coefficients_series(p, np.linspace(0, 10, 21)):
            assert np.max(np.abs(np.diag(c) - 1)) <= 1e-10
            assert np.max(np.abs(c - c.conj().T)) <= 1e-12
            assert np.max(np.abs(c)) <= 1 + 1e-8
            assert np.linalg.eigvalsh((c + c.conj().T) / 2)[0] >= -1e-8


def test_damped_channel_examples():
    m = ModelParams()
    assert np.allclose(damped_channel_at(LindbladParams(m, 0.0), 1.3).gram, channel_at(m, 1.3).gram, atol=1e-8)
    assert np.allclose(damped_channel_at(LindbladParams(m, 0.5), 0.0).gram, np.ones((4, 4)))
    strong = damped_channel_at(LindbladParams(m, 100.0), 5.0)
    assert np.max(np.abs(np.diag(strong.gram) - 1)) <= 1e-10
    assert np.linalg.eigvalsh(strong.gram)[0] >= -1e-8


def test_purity_series_examples():
    m = ModelParams()
    grid = np.linspace(0, 10, 101)
    mixed = purity_series(LindbladParams(m, 0.3), np.eye(4) / 4, grid)
    assert np.allclose(mixed.purity, 0.25)
    v = np.full(4, 0.5)
    rho0 = np.outer(v, v)
    rev = purity_series(LindbladParams(m, 0.0), rho0, grid).purity
    assert rev[0] == pytest.approx(1.0)
    assert np.any(np.diff(rev) > 1e-3) and np.any(np.diff(rev) < -1e-3)
    damped = purity_series(LindbladParams(m, 2.0), rho0, grid).purity
    assert np.all((damped >= 0.25 - 1e-12) & (damped <= 1 + 1e-12))
    assert damped[grid >= 5].max() < rev[grid >= 5].max()


def test_default_dt_max():
    m = ModelParams(gamma_vec=(0, 0, 0))
    assert default_dt_max(LindbladParams(m, 0.0)) == 1e-3
    assert default_dt_max(LindbladParams(m, 0.1)) == pytest.approx(1e-2)
    assert default_dt_max(LindbladParams(ModelParams(), 2.0)) == pytest.approx(1e-3)


def test_step_underflow_reports_time():
    stiff = np.array([[-1e9]], dtype=complex)
    with pytest.raises(IntegratorError) as info:
        _integrate(stiff * 1e9, np.ones((1, 1)), np.array([1.0]), 1.0)
    assert info.value.t_reached is not None


def test_validation():
    with pytest.raises(ValueError):
        LindbladParams(ModelParams(), -0.1)
    with pytest.raises(PreconditionError):
        integrate_full(LindbladParams(), np.eye(8) / 8, -1.0)
