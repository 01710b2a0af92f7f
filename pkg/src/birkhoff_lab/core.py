"""Small dense linear algebra for qubit systems.

Matrices are plain complex ``numpy`` arrays. States are 1-D amplitude
arrays, density matrices are square 2-D arrays; the ``check_*`` helpers
validate them against :mod:`birkhoff_lab.tolerances`.
"""
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionError, InvalidStateError, NotHermitianError
from .tolerances import DEFAULT

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    def as_array(self):
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self):
        return float(np.sqrt(self.x**2 + self.y**2 + self.z**2))


def as_square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def hermitian_defect(a):
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def check_hermitian(a, tol=DEFAULT.hermitian, name="matrix"):
    a = as_square(a, name)
    err = hermitian_defect(a)
    if err > tol:
        raise NotHermitianError(f"{name} is not Hermitian (max deviation {err:.3e} > {tol:.1e})")
    return a


def check_pure_state(psi, tol=DEFAULT.state_norm, dim=None):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DimensionError(f"state must be a 1-D amplitude vector, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise DimensionError(f"expected a {dim}-dimensional state, got {psi.shape[0]}")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > tol:
        raise InvalidStateError(f"state is not normalized (norm {nrm!r})")
    return psi


def check_density_matrix(rho, tol=DEFAULT):
    """Validate trace, Hermiticity and positivity; return the array."""
    rho = check_hermitian(rho, tol.hermitian, "density matrix")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol.trace:
        raise InvalidStateError(f"density matrix trace is {tr!r}")
    lam_min = np.linalg.eigvalsh(rho)[0]
    if lam_min < -tol.psd:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor(*ops):
    """Kronecker product of any number of matrices (or vectors)."""
    if not ops:
        raise ValueError("tensor() needs at least one operand")
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=complex))
    return out


def partial_trace(rho, dims: Sequence[int], keep):
    """Reduced matrix on the subsystems listed in ``keep``.

    ``dims`` are the subsystem dimensions in tensor order; kept subsystems
    retain their original relative order.
    """
    rho = as_square(rho, "rho")
    dims = [int(d) for d in dims]
    if int(np.prod(dims)) != rho.shape[0]:
        raise DimensionError(f"subsystem dims {dims} do not multiply to {rho.shape[0]}")
    keep = sorted({int(k) for k in keep})
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # contract each traced pair, highest index first so positions stay valid
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + t.ndim // 2)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(dk, dk)


def eigh_sorted(h):
    """Hermitian eigendecomposition with a reproducible eigenvector gauge.

    Eigenvalues ascend. Each eigenvector is rephased so that its first
    component with modulus above 1e-12 is real and positive.
    """
    w, v = np.linalg.eigh(h)
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if idx.size:
            c = col[idx[0]]
            v[:, j] = col * (abs(c) / c)
    return w, v


def expm_unitary(h, t):
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = check_hermitian(h, name="generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def bloch_from_state(psi) -> BlochVector:
    psi = check_pure_state(psi, tol=DEFAULT.bloch_norm, dim=2)
    a, b = psi
    # <psi|sigma_k|psi> written out for a qubit
    x = 2.0 * (np.conj(a) * b).real
    y = 2.0 * (np.conj(a) * b).imag
    z = abs(a) ** 2 - abs(b) ** 2
    return BlochVector(float(x), float(y), float(z))


def state_from_bloch(b) -> np.ndarray:
    """A qubit state with the given (unit) Bloch vector, first amplitude real >= 0."""
    x, y, z = (float(c) for c in b)
    r = np.sqrt(x * x + y * y + z * z)
    if abs(r - 1.0) > DEFAULT.bloch_norm:
        raise InvalidStateError(f"Bloch vector has norm {r!r}, expected 1")
    theta = np.arccos(np.clip(z / r, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def purity(rho) -> float:
    rho = as_square(rho, "rho")
    # tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def trace_norm(a) -> float:
    a = as_square(a)
    if hermitian_defect(a) <= DEFAULT.hermitian:
        return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def matrix_units(d):
    """The d*d matrix units |i><j| in row-major order."""
    out = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            out[i * d + j, i, j] = 1.0
    return out
