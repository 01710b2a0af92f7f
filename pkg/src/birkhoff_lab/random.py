"""Seeded random objects for tests, benchmarks and optimizer starts."""
import numpy as np


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def rand_state(d, rng=None):
    rng = _rng(rng)
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return z / np.linalg.norm(z)


def rand_hermitian(d, rng=None, scale=1.0):
    rng = _rng(rng)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def rand_unitary(d, rng=None):
    """Haar-random unitary via QR with the phase correction of Mezzadri."""
    rng = _rng(rng)
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def rand_density(d, rng=None, rank=None):
    rng = _rng(rng)
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def rand_diagonal_unitary(d, rng=None):
    rng = _rng(rng)
    return np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, size=d)))
