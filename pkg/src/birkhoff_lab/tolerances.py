"""Numerical tolerances used across the package, gathered in one record."""
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    trace: float = 1e-10
    psd: float = 1e-10
    state_norm: float = 1e-12
    bloch_norm: float = 1e-10
    unitary: float = 1e-10
    kraus: float = 1e-10
    weights: float = 1e-12
    rank_rel: float = 1e-10
    coplanar: float = 1e-9
    ru_equality: float = 1e-8
    damped_psd: float = 1e-8
    diamond: float = 1e-6

    def updated(self, **overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


DEFAULT = Tolerances()
