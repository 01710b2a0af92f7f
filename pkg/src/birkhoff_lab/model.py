"""Two system qubits dephased by one reservoir qubit.

H = Omega1 Z_A + Omega2 Z_B + kappa1 Z_A Z_R + kappa2 Z_B Z_R + Gamma . sigma_R

Basis order is |00>, |01>, |10>, |11> for (A, B) with Z|0> = +|0>, and the
full space is ordered A (x) B (x) R. hbar = 1 and all quantities are
dimensionless.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channels import PhaseDampingChannel, from_relative_states, fsov_volume
from .core import I2, PAULIS, SZ, bloch_from_state, check_pure_state, expm_unitary, tensor
from .errors import PreconditionError
from .series import TimeSeries

# (s_A, s_B) eigenvalues of (Z_A, Z_B) for system basis states n = 0..3
SIGNS = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=float)


def _default_psi0():
    return np.array([1.0, 0.0], dtype=complex)


@dataclass(frozen=True, eq=False)
class ModelParams:
    omega1: float = 1.0
    omega2: float = 0.5
    kappa1: float = 1.0
    kappa2: float = 0.5
    gamma_vec: tuple = (1.0, 0.0, 0.5)
    psi0: np.ndarray = field(default_factory=_default_psi0)

    def __post_init__(self):
        for name in ("omega1", "omega2", "kappa1", "kappa2"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        g = tuple(float(x) for x in self.gamma_vec)
        if len(g) != 3 or not all(np.isfinite(g)):
            raise ValueError("gamma_vec must be three finite reals")
        object.__setattr__(self, "gamma_vec", g)
        psi = check_pure_state(np.array(self.psi0, dtype=complex), dim=2)
        psi.setflags(write=False)
        object.__setattr__(self, "psi0", psi)

    def replace(self, **changes):
        kw = dict(
            omega1=self.omega1,
            omega2=self.omega2,
            kappa1=self.kappa1,
            kappa2=self.kappa2,
            gamma_vec=self.gamma_vec,
            psi0=self.psi0,
        )
        kw.update(changes)
        return ModelParams(**kw)


def conditional_hamiltonians(p: ModelParams) -> np.ndarray:
    """The four 2x2 reservoir Hamiltonians H^(n), stacked as shape (4, 2, 2)."""
    field_term = sum(g * s for g, s in zip(p.gamma_vec, PAULIS))
    out = np.empty((4, 2, 2), dtype=complex)
    for n, (sa, sb) in enumerate(SIGNS):
        out[n] = (p.omega1 * sa + p.omega2 * sb) * I2 + (p.kappa1 * sa + p.kappa2 * sb) * SZ + field_term
    return out


def full_hamiltonian(p: ModelParams) -> np.ndarray:
    """The 8x8 Hamiltonian on A (x) B (x) R, assembled term by term."""
    za, zb, zr = tensor(SZ, I2, I2), tensor(I2, SZ, I2), tensor(I2, I2, SZ)
    h_r = tensor(I2, I2, sum(g * s for g, s in zip(p.gamma_vec, PAULIS)))
    return (
        p.omega1 * za
        + p.omega2 * zb
        + p.kappa1 * za @ zr
        + p.kappa2 * zb @ zr
        + h_r
    )


def relative_states(p: ModelParams, t: float) -> np.ndarray:
    """Reservoir states exp(-i H^(n) t) psi0, one row per system basis state."""
    hs = conditional_hamiltonians(p)
    return np.array([expm_unitary(h, t) @ p.psi0 for h in hs])


def channel_at(p: ModelParams, t: float) -> PhaseDampingChannel:
    return from_relative_states(relative_states(p, t))


def bloch_vectors_at(p: ModelParams, t: float):
    return [bloch_from_state(s) for s in relative_states(p, t)]


def volume_at(p: ModelParams, t: float) -> float:
    return fsov_volume(bloch_vectors_at(p, t))


class ExtremalityReport(NamedTuple):
    asymmetric_coupling: bool
    transverse_field: bool
    longitudinal_field: bool

    @property
    def all_met(self):
        return self.asymmetric_coupling and self.transverse_field and self.longitudinal_field


def extremality_conditions(p: ModelParams) -> ExtremalityReport:
    # exact comparisons on purpose: these are statements about configured values
    k1, k2 = p.kappa1, p.kappa2
    gx, gy, gz = p.gamma_vec
    return ExtremalityReport(
        asymmetric_coupling=(k1 != 0.0 and k2 != 0.0 and k1 != k2),
        transverse_field=(gx != 0.0 or gy != 0.0),
        longitudinal_field=(gz != 0.0),
    )


def check_grid(grid):
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise PreconditionError("time grid is empty")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise PreconditionError("time grid must be strictly increasing")
    return grid


def volume_time_series(p: ModelParams, grid) -> TimeSeries:
    grid = check_grid(grid)
    return TimeSeries(t=grid, V=np.array([volume_at(p, t) for t in grid]))


def find_volume_zeros(p: ModelParams, grid, xtol=1e-14):
    """Times where V_t changes sign between neighbouring grid points, refined by brentq."""
    from scipy.optimize import brentq

    grid = check_grid(grid)
    vals = np.array([volume_at(p, t) for t in grid])
    roots = [float(t) for t, v in zip(grid, vals) if v == 0.0]
    for a, b, va, vb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if va * vb < 0:
            roots.append(brentq(lambda s: volume_at(p, s), a, b, xtol=xtol))
    return sorted(roots)
