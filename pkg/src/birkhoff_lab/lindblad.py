"""Damped reservoir: the reservoir qubit decays at rate gamma to its ground state.

Ground state is the sigma_z = -1 state |1>, so the lowering operator is
|1><0|. Because both H and the dissipator leave the system populations
alone, every system coherence block chi_mn of the joint state evolves on its
own as a 2x2 matrix; the coefficient multiplying rho_mn is tr chi_mn(t).

Everything is vectorized row-major: vec(A X B) = kron(A, B^T) vec(X).
"""
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .channels import PhaseDampingChannel
from .core import check_density_matrix, projector, purity
from .errors import IntegratorError, IntegrityError, InvalidChannelError, PreconditionError
from .model import ModelParams, check_grid, conditional_hamiltonians, full_hamiltonian
from .series import TimeSeries
from .tolerances import DEFAULT

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T

STEP_TOL = 1e-12
FULL_TRACE_TOL = 1e-8
FULL_PSD_TOL = 1e-7


@dataclass(frozen=True)
class LindbladParams:
    model: ModelParams = field(default_factory=ModelParams)
    gamma: float = 0.0

    def __post_init__(self):
        g = float(self.gamma)
        if not np.isfinite(g) or g < 0:
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        object.__setattr__(self, "gamma", g)


def default_dt_max(p: LindbladParams) -> float:
    scales = [1.0]
    if p.gamma > 0:
        scales.append(1.0 / p.gamma)
    gnorm = float(np.linalg.norm(p.model.gamma_vec))
    if gnorm > 0:
        scales.append(1.0 / gnorm)
    return 1e-3 * max(scales)


def _dissipator(gamma, dim_left):
    """Row-major superoperator of the decay term acting on the last qubit."""
    lm = np.kron(np.eye(dim_left), SIGMA_MINUS)
    ldl = lm.conj().T @ lm
    n = lm.shape[0]
    eye = np.eye(n)
    return 0.5 * gamma * (2 * np.kron(lm, lm.conj()) - np.kron(ldl, eye) - np.kron(eye, ldl.T))


def lindblad_rhs(p: LindbladParams, rho_tot):
    rho = np.asarray(rho_tot, dtype=complex)
    if rho.shape != (8, 8):
        raise PreconditionError(f"expected an 8x8 joint state, got {rho.shape}")
    h = full_hamiltonian(p.model)
    out = -1j * (h @ rho - rho @ h)
    if p.gamma:
        lm = np.kron(np.eye(4), SIGMA_MINUS)
        ldl = lm.conj().T @ lm
        out += 0.5 * p.gamma * (2 * lm @ rho @ lm.conj().T - ldl @ rho - rho @ ldl)
    return out


def liouvillian(p: LindbladParams):
    """64x64 generator L with d vec(rho)/dt = L vec(rho)."""
    h = full_hamiltonian(p.model)
    eye = np.eye(8)
    return -1j * (np.kron(h, eye) - np.kron(eye, h.T)) + _dissipator(p.gamma, 4)


def block_liouvillian(p: LindbladParams):
    """Block-diagonal generator for all 16 coherence blocks, block (m, n) at 4*(4m+n)."""
    hs = conditional_hamiltonians(p.model)
    eye = np.eye(2)
    diss = _dissipator(p.gamma, 1)
    out = np.zeros((64, 64), dtype=complex)
    for m in range(4):
        for n in range(4):
            b = 4 * (4 * m + n)
            out[b:b + 4, b:b + 4] = -1j * (np.kron(hs[m], eye) - np.kron(eye, hs[n].T)) + diss
    return out


def _integrate(l, y0, times, dt_max):
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise PreconditionError("times must be non-negative")
    dt_min = 1e-13 * max(1.0, float(times.max(initial=0.0)))
    out, ok, t_reached = K.rk4_linear(
        np.ascontiguousarray(l), np.ascontiguousarray(y0, dtype=complex), times, dt_max, STEP_TOL, dt_min
    )
    if not ok:
        raise IntegratorError(f"step size underflow at t = {t_reached:.6g}", t_reached)
    return out


def integrate_full_series(p: LindbladParams, rho0s, times, dt_max=None, check=True):
    """Evolve a stack of 8x8 initial matrices; returns shape (len(times), m, 8, 8).

    ``check`` validates trace and positivity of outputs whose input was a
    density matrix (used by :func:`integrate_full`).
    """
    rho0s = np.asarray(rho0s, dtype=complex)
    dt_max = default_dt_max(p) if dt_max is None else float(dt_max)
    y0 = rho0s.reshape(rho0s.shape[0], 64).T
    out = _integrate(liouvillian(p), y0, times, dt_max)
    return out.transpose(0, 2, 1).reshape(len(times), rho0s.shape[0], 8, 8)


def integrate_full(p: LindbladParams, rho0_tot, t, dt_max=None):
    rho0 = check_density_matrix(rho0_tot)
    if rho0.shape != (8, 8):
        raise PreconditionError(f"expected an 8x8 joint state, got {rho0.shape}")
    if t < 0:
        raise PreconditionError("t must be >= 0")
    rho = integrate_full_series(p, rho0[None], [float(t)], dt_max)[0, 0]
    tr = np.trace(rho)
    if abs(tr - 1.0) > FULL_TRACE_TOL:
        raise IntegrityError(f"trace drifted to {tr!r}")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lam < -FULL_PSD_TOL:
        raise IntegrityError(f"state lost positivity (eigenvalue {lam:.3e})")
    return rho


def dephasing_coefficients_series(p: LindbladParams, times, dt_max=None):
    """c(t) for every entry of ``times``; shape (len(times), 4, 4)."""
    dt_max = default_dt_max(p) if dt_max is None else float(dt_max)
    chi0 = projector(p.model.psi0).reshape(4)
    y0 = np.tile(chi0, 16)[:, None]
    out = _integrate(block_liouvillian(p), y0, times, dt_max)[:, :, 0]
    blocks = out.reshape(len(times), 4, 4, 4)
    return blocks[..., 0] + blocks[..., 3]


def dephasing_coefficients(p: LindbladParams, t, dt_max=None):
    return dephasing_coefficients_series(p, [float(t)], dt_max)[0]


def channel_from_coefficients(c, tol=DEFAULT):
    try:
        return PhaseDampingChannel.from_gram(c, tol, psd_tol=tol.damped_psd, diag_tol=tol.trace)
    except InvalidChannelError as exc:
        raise IntegrityError(f"damped coefficients are not a valid channel: {exc}") from exc


def damped_channel_at(p: LindbladParams, t, dt_max=None, tol=DEFAULT):
    return channel_from_coefficients(dephasing_coefficients(p, t, dt_max), tol)


def damped_channels(p: LindbladParams, grid, dt_max=None, tol=DEFAULT):
    grid = check_grid(grid)
    return [channel_from_coefficients(c, tol) for c in dephasing_coefficients_series(p, grid, dt_max)]


def purity_series(p: LindbladParams, rho0, grid, dt_max=None, tol=DEFAULT) -> TimeSeries:
    rho0 = check_density_matrix(rho0, tol)
    if rho0.shape != (4, 4):
        raise PreconditionError("rho0 must be a two-qubit density matrix")
    grid = check_grid(grid)
    chans = damped_channels(p, grid, dt_max, tol)
    return TimeSeries(grid, purity=np.array([purity(ch.apply(rho0)) for ch in chans]))
