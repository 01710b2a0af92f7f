"""Phase damping, Kraus and random-unitary channel representations.

Gram convention: ``gram[m, n] = <a_n|a_m>``, so that a phase damping
channel acts entrywise as ``rho'[m, n] = gram[m, n] * rho[m, n]``. The
transposed convention silently conjugates every coherence; keep it this way.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    BlochVector,
    I2,
    PAULIS,
    as_square,
    bloch_from_state,
    check_pure_state,
    eigh_sorted,
    hermitian_defect,
    matrix_units,
    SZ,
)
from .errors import DimensionError, InvalidChannelError, PreconditionError
from .tolerances import DEFAULT


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def choi_from_kraus(kraus):
    """Choi matrix sum_ij E(|i><j|) (x) |i><j| (output factor first)."""
    kraus = np.asarray(kraus, dtype=complex)
    vecs = kraus.reshape(kraus.shape[0], -1)
    return vecs.T @ vecs.conj()


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise DimensionError(f"Kraus operators must be square, got shape {k.shape}")
        object.__setattr__(self, "kraus", _frozen(k))

    @property
    def dim(self):
        return self.kraus.shape[1]

    @property
    def rank(self):
        return self.kraus.shape[0]

    def apply(self, rho):
        rho = as_square(rho, "rho")
        if rho.shape[0] != self.dim:
            raise DimensionError(f"channel acts on dimension {self.dim}, got {rho.shape[0]}")
        return np.einsum("kab,bc,kdc->ad", self.kraus, rho, self.kraus.conj())

    def choi(self):
        return choi_from_kraus(self.kraus)

    def tp_defect(self):
        s = np.einsum("kba,kbc->ac", self.kraus.conj(), self.kraus)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def unital_defect(self):
        s = np.einsum("kab,kcb->ac", self.kraus, self.kraus.conj())
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def validate(self, tol=DEFAULT.kraus):
        err = self.tp_defect()
        if err > tol:
            raise InvalidChannelError(f"Kraus operators are not trace preserving (defect {err:.3e})")
        return self

    def as_kraus(self):
        return self


@dataclass(frozen=True, eq=False)
class RUChannel:
    weights: np.ndarray
    unitaries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        u = np.asarray(self.unitaries, dtype=complex)
        if u.ndim == 2:
            u = u[None]
        if u.ndim != 3 or u.shape[1] != u.shape[2] or u.shape[0] != w.shape[0]:
            raise DimensionError("need one square unitary per weight")
        object.__setattr__(self, "weights", _frozen(w, float))
        object.__setattr__(self, "unitaries", _frozen(u))

    @property
    def dim(self):
        return self.unitaries.shape[1]

    def validate(self, tol=DEFAULT):
        if np.any(self.weights <= 0):
            raise InvalidChannelError("RU weights must be strictly positive")
        if abs(self.weights.sum() - 1.0) > tol.weights:
            raise InvalidChannelError(f"RU weights sum to {self.weights.sum()!r}")
        eye = np.eye(self.dim)
        for u in self.unitaries:
            err = np.max(np.abs(u.conj().T @ u - eye))
            if err > tol.unitary:
                raise InvalidChannelError(f"component is not unitary (defect {err:.3e})")
        return self

    def as_kraus(self):
        return KrausChannel(np.sqrt(self.weights)[:, None, None] * self.unitaries)

    def apply(self, rho):
        return self.as_kraus().apply(rho)

    def choi(self):
        return self.as_kraus().choi()

    def is_diagonal(self, tol=1e-12):
        off = self.unitaries.copy()
        idx = np.arange(self.dim)
        off[:, idx, idx] = 0
        return bool(np.max(np.abs(off), initial=0.0) <= tol)

    def gram(self):
        """Coherence multipliers of a mixture of diagonal unitaries."""
        if not self.is_diagonal():
            raise PreconditionError("gram() needs diagonal unitaries")
        ph = np.diagonal(self.unitaries, axis1=1, axis2=2)
        return np.einsum("k,km,kn->mn", self.weights, ph, ph.conj())

    def simplified(self, min_weight=0.0, tol=1e-12):
        """Drop weights <= min_weight and merge components equal up to a global phase."""
        ws, us = [], []
        for w, u in zip(self.weights, self.unitaries):
            if w <= min_weight:
                continue
            for j, v in enumerate(us):
                ov = np.vdot(v, u) / self.dim
                if abs(abs(ov) - 1.0) <= tol:
                    ws[j] += w
                    break
            else:
                ws.append(float(w))
                us.append(u)
        ws = np.array(ws)
        return RUChannel(ws / ws.sum(), np.array(us))


@dataclass(frozen=True, eq=False)
class PhaseDampingChannel:
    """Dephasing channel in the computational basis, stored as its Gram matrix."""

    gram: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gram", _frozen(as_square(self.gram, "gram")))

    @classmethod
    def from_gram(cls, gram, tol=DEFAULT, psd_tol=None, diag_tol=None):
        """Validate and wrap; small Hermiticity errors are symmetrized away."""
        g = as_square(gram, "gram")
        psd_tol = tol.psd if psd_tol is None else psd_tol
        diag_tol = tol.state_norm if diag_tol is None else diag_tol
        herm_tol = max(tol.hermitian, psd_tol)
        if hermitian_defect(g) > herm_tol:
            raise InvalidChannelError("gram matrix is not Hermitian")
        g = (g + g.conj().T) / 2
        diag_err = np.max(np.abs(np.diagonal(g) - 1.0))
        if diag_err > diag_tol:
            raise InvalidChannelError(f"gram diagonal deviates from 1 by {diag_err:.3e}")
        lam = np.linalg.eigvalsh(g)[0]
        if lam < -psd_tol:
            raise InvalidChannelError(f"gram matrix is not positive semidefinite (min eigenvalue {lam:.3e})")
        return cls(g)

    @property
    def d(self):
        return self.gram.shape[0]

    dim = d

    def apply(self, rho):
        rho = as_square(rho, "rho")
        if rho.shape[0] != self.d:
            raise DimensionError(f"channel acts on dimension {self.d}, got {rho.shape[0]}")
        return self.gram * rho

    def choi(self):
        d = self.d
        j = np.zeros((d * d, d * d), dtype=complex)
        idx = np.arange(d) * (d + 1)
        j[np.ix_(idx, idx)] = self.gram
        return j

    def as_kraus(self):
        return kraus_from_gram(self)


def from_relative_states(states, tol=DEFAULT.state_norm) -> PhaseDampingChannel:
    """Phase damping channel whose coherences are overlaps of ``states``."""
    a = np.array([check_pure_state(s, tol) for s in states])
    if a.ndim != 2:
        raise DimensionError("relative states must share one dimension")
    gram = a @ a.conj().T  # [m, n] = sum_r a_m[r] conj(a_n[r]) = <a_n|a_m>
    np.fill_diagonal(gram, np.einsum("ij,ij->i", a.conj(), a).real)
    return PhaseDampingChannel(gram)


def apply(ch, rho):
    return ch.apply(rho)


def kraus_from_gram(ch: PhaseDampingChannel, tol=DEFAULT) -> KrausChannel:
    g = ch.gram
    if hermitian_defect(g) > max(tol.hermitian, tol.damped_psd):
        raise InvalidChannelError("gram matrix is not Hermitian")
    if np.max(np.abs(np.diagonal(g) - 1.0)) > tol.damped_psd:
        raise InvalidChannelError("gram diagonal is not 1")
    w, v = eigh_sorted((g + g.conj().T) / 2)
    if w[0] < -tol.damped_psd:
        raise InvalidChannelError(f"gram is not positive semidefinite (min eigenvalue {w[0]:.3e})")
    keep = w > tol.rank_rel * w[-1]
    ks = [np.diag(np.sqrt(lam) * v[:, i]) for i, lam in enumerate(w) if keep[i]]
    return KrausChannel(np.array(ks))


def gram_from_diagonal_kraus(kraus: KrausChannel):
    a = np.diagonal(kraus.kraus, axis1=1, axis2=2)  # a[i, m] = K_i[m, m]
    return a.T @ a.conj()


def is_doubly_stochastic(ch, tol=DEFAULT.kraus) -> bool:
    k = ch.as_kraus()
    return k.tp_defect() <= tol and k.unital_defect() <= tol


def fsov_volume(blochs) -> float:
    """Signed volume (1/6) det[(1, b_n)] of the tetrahedron with vertices b_n."""
    b = np.array([np.asarray(v, dtype=float) for v in blochs])
    if b.shape != (4, 3):
        raise DimensionError(f"need exactly four Bloch vectors, got shape {b.shape}")
    m = np.vstack([np.ones(4), b.T])
    return float(np.linalg.det(m) / 6.0)


def single_qubit_ru(phi0: float, p: float) -> RUChannel:
    """The qubit dephasing channel exp(-i phi0 Z)(p rho + (1-p) Z rho Z)exp(i phi0 Z)."""
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"p must lie in [0, 1], got {p!r}")
    rot = np.diag([np.exp(-1j * phi0), np.exp(1j * phi0)])
    comps = [(p, rot), (1.0 - p, rot @ SZ)]
    comps = [(w, u) for w, u in comps if w > 0]
    return RUChannel([w for w, _ in comps], np.array([u for _, u in comps]))


def _su2_aligning(n):
    """SU(2) element whose Bloch rotation maps unit vector n onto +z."""
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(n, z)
    s = np.linalg.norm(axis)
    c = float(np.dot(n, z))
    if s < 1e-15:
        if c > 0:
            return I2.copy()
        axis = np.array([1.0, 0.0, 0.0])
    else:
        axis = axis / s
    theta = np.arctan2(s, c)
    gen = sum(a * p for a, p in zip(axis, PAULIS))
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * gen


def coplanar_ru_decomposition(states, tol=DEFAULT) -> RUChannel:
    """Explicit two-unitary decomposition of a channel with coplanar Bloch images.

    A common SU(2) rotation of the relative states leaves every overlap
    unchanged, so the plane of Bloch points can be turned horizontal; then
    every state reads (sqrt(1-p) e^{i phi1}, sqrt(p) e^{i phi2}) with one
    shared p, and the channel is (1-p) U1 . U1^+ + p U2 . U2^+.
    """
    states = np.array([check_pure_state(s, tol.bloch_norm, dim=2) for s in states])
    if states.shape != (4, 2):
        raise DimensionError("need four qubit states")
    blochs = np.array([bloch_from_state(s).as_array() for s in states])
    vol = fsov_volume(blochs)
    if abs(vol) > tol.coplanar:
        raise PreconditionError(
            f"Bloch vectors are not coplanar: |V| = {abs(vol):.3e} > {tol.coplanar:.1e}"
        )
    centred = blochs - blochs.mean(axis=0)
    if np.max(np.abs(centred)) < 1e-14:
        normal = blochs[0]
    else:
        normal = np.linalg.svd(centred)[2][-1]
    # fix the sign so a horizontal plane needs no rotation at all
    lead = next((c for c in (normal[2], normal[0], normal[1]) if abs(c) > 1e-12), 1.0)
    normal = normal * np.sign(lead)
    w = _su2_aligning(normal)
    rotated = states @ w.T
    p = float(np.mean(np.abs(rotated[:, 1]) ** 2))
    u1 = np.diag(np.exp(1j * np.angle(rotated[:, 0])))
    u2 = np.diag(np.exp(1j * np.angle(rotated[:, 1])))
    ru = RUChannel([1.0 - p, p], np.array([u1, u2])).simplified(min_weight=1e-14)
    err = max_channel_deviation(ru, from_relative_states(states))
    if err > tol.ru_equality:
        raise PreconditionError(
            f"coplanar decomposition misses the channel by {err:.3e}; input is only nearly coplanar"
        )
    return ru


def max_channel_deviation(a, b):
    """Largest entrywise output difference over all d*d matrix units."""
    d = a.dim
    worst = 0.0
    for e in matrix_units(d):
        worst = max(worst, float(np.max(np.abs(a.apply(e) - b.apply(e)))))
    return worst


def as_channel_kraus(ch) -> KrausChannel:
    if isinstance(ch, (KrausChannel, RUChannel, PhaseDampingChannel)):
        return ch.as_kraus()
    raise TypeError(f"cannot convert {type(ch).__name__} to Kraus form")


__all__ = [
    "BlochVector",
    "KrausChannel",
    "PhaseDampingChannel",
    "RUChannel",
    "apply",
    "as_channel_kraus",
    "choi_from_kraus",
    "coplanar_ru_decomposition",
    "from_relative_states",
    "fsov_volume",
    "gram_from_diagonal_kraus",
    "is_doubly_stochastic",
    "kraus_from_gram",
    "max_channel_deviation",
    "single_qubit_ru",
]
