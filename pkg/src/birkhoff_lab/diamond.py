"""Diamond norm of differences of channels.

The general route maximizes ``||(Delta (x) id)(|z><z|)||_1`` over unit vectors
``z`` on system (x) ancilla (ancilla dimension = system dimension): a
monotone alternating ascent followed by an L-BFGS polish of the smooth
Rayleigh-type objective.

When both channels are mixtures of diagonal Kraus operators, ``Delta`` is a
Schur multiplier by a Hermitian matrix ``A`` and the optimum is attained on
states ``sum_i x_i |i>|i>`` with real ``x``; :func:`schur_diamond_norm` then
works in ``d`` variables instead of ``d**2`` complex ones.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _kernels as K
from .channels import KrausChannel, as_channel_kraus, choi_from_kraus
from .core import hermitian_defect
from .errors import DimensionError, IntegrityError
from .tolerances import DEFAULT

ASCENT_STEPS = 30
POLISH_ITER = 500
SCHUR_ITER = 5000


@dataclass(frozen=True, eq=False)
class HermitianPreservingMap:
    """``minuend - subtrahend`` for two channels given in Kraus form."""

    minuend: KrausChannel
    subtrahend: KrausChannel
    choi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = as_channel_kraus(self.minuend)
        b = as_channel_kraus(self.subtrahend)
        if a.dim != b.dim:
            raise DimensionError(f"channel dimensions differ: {a.dim} vs {b.dim}")
        object.__setattr__(self, "minuend", a)
        object.__setattr__(self, "subtrahend", b)
        j = choi_from_kraus(a.kraus) - choi_from_kraus(b.kraus)
        if hermitian_defect(j) > 1e-10:
            raise IntegrityError("Choi matrix of the difference is not Hermitian")
        j.setflags(write=False)
        object.__setattr__(self, "choi", j)

    @classmethod
    def difference(cls, a, b):
        return cls(as_channel_kraus(a), as_channel_kraus(b))

    @property
    def dim(self):
        return self.minuend.dim

    def signed_kraus(self):
        ks = np.concatenate([self.minuend.kraus, self.subtrahend.kraus])
        signs = np.concatenate([np.ones(self.minuend.rank), -np.ones(self.subtrahend.rank)])
        return ks, signs

    def schur_matrix(self, tol=1e-13):
        """Coherence matrix A when Delta acts as rho -> A * rho, else None."""
        ks, signs = self.signed_kraus()
        idx = np.arange(self.dim)
        off = ks.copy()
        off[:, idx, idx] = 0
        if np.max(np.abs(off), initial=0.0) > tol:
            return None
        diag = np.diagonal(ks, axis1=1, axis2=2)
        return np.einsum("i,im,in->mn", signs, diag, diag.conj())


@dataclass(frozen=True)
class DiamondResult:
    value: float
    converged: bool
    method: str
    state: np.ndarray  # maximizing z (general) or x (schur)
    per_start: tuple


def _start_vectors(n, starts, seed):
    rng = np.random.default_rng(seed)
    yield np.eye(int(round(np.sqrt(n))), dtype=complex).reshape(-1) / np.sqrt(np.sqrt(n))
    for _ in range(starts - 1):
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        yield z / np.linalg.norm(z)


def kron_kraus(ks):
    d = ks.shape[1]
    eye = np.eye(d)
    return np.ascontiguousarray(np.array([np.kron(k, eye) for k in ks]))


def general_diamond(kb, signs, starts=3, seed=0, tol=DEFAULT.diamond, z_init=None):
    n = kb.shape[1]
    signs = np.ascontiguousarray(signs, dtype=float)
    inits = list(_start_vectors(n, starts, seed))
    if z_init is not None:
        inits.insert(0, np.ascontiguousarray(z_init, dtype=complex))
    vals, best = [], (-np.inf, None, False)
    for z0 in inits:
        v, z, _, _ = K.diamond_ascent(kb, signs, z0, ASCENT_STEPS, 1e-15)
        res = minimize(
            K.diamond_polish_fg,
            np.concatenate([z.real, z.imag]),
            args=(kb, signs),
            jac=True,
            method="L-BFGS-B",
            options=dict(maxiter=POLISH_ITER, gtol=1e-12, ftol=1e-16),
        )
        val = max(v, -float(res.fun))
        zr = res.x[:n] + 1j * res.x[n:] if -res.fun >= v else z
        vals.append(val)
        if val > best[0]:
            best = (val, zr / np.linalg.norm(zr), bool(res.success))
    ordered = sorted(vals, reverse=True)
    agree = len(ordered) > 1 and ordered[0] - ordered[1] <= tol
    return DiamondResult(float(best[0]), best[2] or agree, "general", best[1], tuple(vals))


def schur_diamond(a, starts=4, seed=0, tol=DEFAULT.diamond):
    a = np.ascontiguousarray(a, dtype=complex)
    d = a.shape[0]
    rng = np.random.default_rng(seed)
    inits = [np.ones(d)] + [np.abs(rng.normal(size=d)) + 1e-3 for _ in range(starts - 1)]
    vals, best = [], (-np.inf, None, False)
    for x0 in inits:
        v, x, _, its = K.schur_ascent(a, x0, SCHUR_ITER, 1e-15)
        vals.append(float(v))
        if v > best[0]:
            best = (float(v), x, its < SCHUR_ITER)
    ordered = sorted(vals, reverse=True)
    agree = len(ordered) > 1 and ordered[0] - ordered[1] <= tol
    return DiamondResult(best[0], best[2] or agree, "schur", best[1], tuple(vals))


def diamond_norm_detail(delta: HermitianPreservingMap, tol=DEFAULT.diamond, method="auto", starts=None, seed=0):
    if method not in ("auto", "general", "schur"):
        raise ValueError(f"unknown method {method!r}")
    a = delta.schur_matrix() if method != "general" else None
    if method == "schur" and a is None:
        raise ValueError("map is not a Schur multiplier")
    if a is not None:
        if np.max(np.abs(a)) == 0.0:
            return DiamondResult(0.0, True, "schur", np.ones(delta.dim) / np.sqrt(delta.dim), (0.0,))
        return schur_diamond(a, starts or 4, seed, tol)
    ks, signs = delta.signed_kraus()
    return general_diamond(kron_kraus(ks), signs, starts or 3, seed, tol)


def diamond_norm(delta: HermitianPreservingMap, tol=DEFAULT.diamond, **kw) -> float:
    return diamond_norm_detail(delta, tol, **kw).value


def diamond_distance(a, b, tol=DEFAULT.diamond, **kw) -> float:
    """Convenience: ||a - b||_diamond for any two channel objects."""
    return diamond_norm(HermitianPreservingMap.difference(a, b), tol, **kw)


def schur_diamond_norm(a, tol=DEFAULT.diamond, starts=4, seed=0) -> float:
    return schur_diamond(a, starts, seed, tol).value
