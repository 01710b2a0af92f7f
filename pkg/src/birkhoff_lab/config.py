"""Run configuration: flat ``key = value`` text with ``#`` comments.

Every key is optional; unknown keys are rejected so typos fail loudly.
"""
import math
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from .birkhoff import OptimizerConfig
from .errors import ConfigError
from .lindblad import LindbladParams
from .model import ModelParams
from .tolerances import DEFAULT, Tolerances

PSI0_SILENT = 1e-9
PSI0_WARN = 1e-6


def _real(raw):
    v = float(raw)
    if not math.isfinite(v):
        raise ValueError("must be finite")
    return v


def _int(raw):
    return int(raw, 10)


def _bool(raw):
    low = raw.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def _choice(*allowed):
    def conv(raw):
        if raw not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return raw

    return conv


# config key -> (RunConfig attribute, converter)
_KEYS = {
    "omega1": ("omega1", _real),
    "omega2": ("omega2", _real),
    "kappa1": ("kappa1", _real),
    "kappa2": ("kappa2", _real),
    "gamma_x": ("gamma_x", _real),
    "gamma_y": ("gamma_y", _real),
    "gamma_z": ("gamma_z", _real),
    "psi0_re0": ("psi0_re0", _real),
    "psi0_im0": ("psi0_im0", _real),
    "psi0_re1": ("psi0_re1", _real),
    "psi0_im1": ("psi0_im1", _real),
    "gamma_decay": ("gamma_decay", _real),
    "t_max": ("t_max", _real),
    "n_steps": ("n_steps", _int),
    "seed": ("seed", _int),
    "dt_max": ("dt_max", _real),
    "rho0": ("rho0", _choice("uniform", "mixed")),
    "output": ("output", str),
    "defect.k": ("defect_k", _int),
    "defect.starts": ("defect_starts", _int),
    "defect.tol": ("defect_tol", _real),
    "defect.mode": ("defect_mode", _choice("general", "diagonal")),
    "defect.max_iter": ("defect_max_iter", _int),
    "defect.exchange_rounds": ("defect_exchange_rounds", _int),
    "defect.refine_iter": ("defect_refine_iter", _int),
    "defect.warm_start": ("defect_warm_start", _bool),
    "defect.consensus": ("defect_consensus", _int),
}
_TOL_KEYS = {f"tol.{f.name}": f.name for f in fields(Tolerances)}


@dataclass(frozen=True)
class RunConfig:
    omega1: float = 1.0
    omega2: float = 0.5
    kappa1: float = 1.0
    kappa2: float = 0.5
    gamma_x: float = 1.0
    gamma_y: float = 0.0
    gamma_z: float = 0.5
    psi0_re0: float = 1.0
    psi0_im0: float = 0.0
    psi0_re1: float = 0.0
    psi0_im1: float = 0.0
    gamma_decay: float = 0.0
    t_max: float = 10.0
    n_steps: int = 1000
    seed: int = 1
    dt_max: float = None
    rho0: str = "uniform"
    output: str = None
    defect_k: int = 8
    defect_starts: int = 16
    defect_tol: float = 1e-6
    defect_mode: str = "general"
    defect_max_iter: int = 500
    defect_exchange_rounds: int = 6
    defect_refine_iter: int = 0
    defect_warm_start: bool = True
    defect_consensus: int = 3
    tolerances: Tolerances = field(default=DEFAULT)

    def psi0(self):
        return np.array([self.psi0_re0 + 1j * self.psi0_im0, self.psi0_re1 + 1j * self.psi0_im1])

    def model_params(self):
        return ModelParams(
            omega1=self.omega1,
            omega2=self.omega2,
            kappa1=self.kappa1,
            kappa2=self.kappa2,
            gamma_vec=(self.gamma_x, self.gamma_y, self.gamma_z),
            psi0=self.psi0(),
        )

    def lindblad_params(self):
        return LindbladParams(self.model_params(), self.gamma_decay)

    def optimizer_config(self):
        return OptimizerConfig(
            k=self.defect_k,
            starts=self.defect_starts,
            tol=self.defect_tol,
            mode=self.defect_mode,
            max_iter=self.defect_max_iter,
            exchange_rounds=self.defect_exchange_rounds,
            refine_iter=self.defect_refine_iter,
            warm_start=self.defect_warm_start,
            consensus=self.defect_consensus,
            seed=self.seed,
        )

    def grid(self):
        return np.linspace(0.0, self.t_max, self.n_steps + 1)

    def rho0_matrix(self):
        if self.rho0 == "mixed":
            return np.eye(4, dtype=complex) / 4
        v = np.full(4, 0.5, dtype=complex)
        return np.outer(v, v.conj())


def _validate(values, lines):
    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", line=lines.get(key), key=key)

    if values.get("n_steps", 1) < 1:
        fail("n_steps", "must be >= 1")
    if values.get("t_max", 1.0) <= 0:
        fail("t_max", "must be > 0")
    if values.get("gamma_decay", 0.0) < 0:
        fail("gamma_decay", "must be >= 0")
    if values.get("dt_max") is not None and values["dt_max"] <= 0:
        fail("dt_max", "must be > 0")
    for key in ("defect_k", "defect_starts", "defect_max_iter"):
        if values.get(key, 1) < 1:
            fail(key.replace("defect_", "defect."), "must be >= 1")
    for key in ("defect_exchange_rounds", "defect_refine_iter", "defect_consensus"):
        if values.get(key, 0) < 0:
            fail(key.replace("defect_", "defect."), "must be >= 0")
    if values.get("defect_tol", 1.0) <= 0:
        fail("defect.tol", "must be > 0")


def _normalize_psi0(values, lines):
    names = ("psi0_re0", "psi0_im0", "psi0_re1", "psi0_im1")
    defaults = {f.name: f.default for f in fields(RunConfig)}
    comps = np.array([values.get(n, defaults[n]) for n in names])
    norm = float(np.linalg.norm(comps))
    drift = abs(norm - 1.0)
    if drift > PSI0_WARN or norm == 0.0:
        key = next((n for n in names if n in values), "psi0_re0")
        raise ConfigError(f"psi0 has norm {norm!r}; fix the components", line=lines.get(key), key=key)
    if drift > PSI0_SILENT:
        warnings.warn(f"psi0 has norm {norm!r}; normalizing", stacklevel=3)
    if drift > 0:
        for n, c in zip(names, comps / norm):
            values[n] = float(c)


def parse_config(text: str) -> RunConfig:
    values, lines, tol_over = {}, {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key", line=lineno)
        if key in lines:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", line=lineno, key=key)
        if key in _TOL_KEYS:
            attr, conv = _TOL_KEYS[key], _real
        elif key in _KEYS:
            attr, conv = _KEYS[key]
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", line=lineno, key=key)
        try:
            parsed = conv(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}", line=lineno, key=key) from None
        lines[key] = lines[attr] = lineno
        if key in _TOL_KEYS:
            if parsed <= 0:
                raise ConfigError(f"line {lineno}: {key} must be > 0", line=lineno, key=key)
            tol_over[attr] = parsed
        else:
            values[attr] = parsed
    _validate(values, lines)
    _normalize_psi0(values, lines)
    return RunConfig(tolerances=DEFAULT.updated(**tol_over), **values)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
