"""Birkhoff defect: diamond distance from a phase damping channel to RU channels.

Per start (seed = base_seed + i) the general mode runs

1. a Frobenius (Choi-distance) fit of k general unitaries U_j = exp(-i A_j),
   a smooth surrogate that lands in the right basin quickly;
2. a reduction to diagonal unitaries (the phases of diag U_j). For a target
   that is itself diagonal this never moves the Choi fit away and in practice
   lowers the diamond distance;
3. least squares on the coherence matrix over phases and weights. Channels
   inside the RU set are driven to ~1e-8 here, which the nonsmooth diamond
   objective alone reaches only slowly;
4. L-BFGS on the exact diamond distance over phases and weights, using the
   Schur-multiplier form of the norm and a Danskin gradient;
5. an exchange loop: the inner maximizer yields a dual matrix M, and a
   diagonal unitary u with u^+ M u above every active component is swapped
   in for the lightest component, after which step 4 repeats;
6. optionally, L-BFGS over the full general parametrization, kept only when
   it improves the value.

Diagonal mode starts from random phases and runs steps 3-5. Starts stop
early once ``consensus`` of them agree on the best value, or two of them
are already below ``tol``.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from . import _kernels as K
from .channels import PhaseDampingChannel, RUChannel, kraus_from_gram
from .diamond import HermitianPreservingMap, diamond_norm_detail, kron_kraus
from .errors import BirkhoffLabError, OptimizerError, PreconditionError
from .lindblad import LindbladParams, damped_channels
from .model import check_grid
from .series import TimeSeries

log = logging.getLogger(__name__)

ZERO_LOG_WEIGHT = -40.0  # softmax weight ~ 4e-18 relative: a padded, unused component
FLOOR_FRACTION = 0.1  # a start stops descending once d_B < FLOOR_FRACTION * tol
GRAM_FIT_ITER = 3000
AGREE_REL = 1e-4  # starts within a relative AGREE_REL of the best count as agreeing


@dataclass(frozen=True)
class OptimizerConfig:
    k: int = 8
    starts: int = 16
    max_iter: int = 500
    stall_iter: int = 20
    stall_tol: float = 1e-8
    tol: float = 1e-6
    seed: int = 1
    mode: str = "general"
    exchange_rounds: int = 6
    refine_iter: int = 0
    warm_start: bool = True
    consensus: int = 3  # stop once this many starts agree (0: always run every start)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.mode not in ("general", "diagonal"):
            raise ValueError(f"mode must be 'general' or 'diagonal', got {self.mode!r}")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.consensus < 0:
            raise ValueError("consensus must be >= 0")

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class DefectResult:
    d_B: float
    witness: RUChannel
    starts_used: int
    per_start: tuple
    converged: bool
    upper_bound_only: bool = False
    diagnostics: tuple = field(default=(), repr=False)


class _Stall:
    """Stops scipy's L-BFGS once the objective improved < tol over ``window``
    iterations, or once it is below ``floor`` (nothing left to resolve)."""

    def __init__(self, window, tol, floor):
        self.window, self.tol, self.floor, self.hist = window, tol, floor, []

    def __call__(self, intermediate_result):
        f = float(intermediate_result.fun)
        self.hist.append(f)
        h = self.hist
        if f < self.floor or (len(h) > self.window and h[-self.window - 1] - h[-1] < self.tol):
            raise StopIteration


def _lbfgs(fun, x0, cfg, args=(), floor=-np.inf):
    return minimize(
        fun,
        x0,
        args=args,
        jac=True,
        method="L-BFGS-B",
        callback=_Stall(cfg.stall_iter, cfg.stall_tol, floor),
        options=dict(maxiter=cfg.max_iter, gtol=1e-10, ftol=1e-14),
    )


@lru_cache(maxsize=None)
def _torus_grid(d):
    m = max(2, int(round(4096 ** (1.0 / max(d - 1, 1)))))
    angles = np.linspace(0.0, 2 * np.pi, m, endpoint=False)
    pts = [np.exp(1j * np.r_[0.0, a]) for a in itertools.product(angles, repeat=d - 1)]
    g = np.ascontiguousarray(np.array(pts))
    g.setflags(write=False)
    return g


class _DiagonalProblem:
    """Exact diamond distance to diagonal k-mixtures, parametrized by phases and log-weights."""

    def __init__(self, gram, k, inner_iter=5000):
        self.gram = np.ascontiguousarray(gram, dtype=complex)
        self.d = self.gram.shape[0]
        self.k = k
        self.inner_iter = inner_iter
        self.x = np.ones(self.d)

    def __call__(self, theta):
        v, g, x, _ = K.diag_diamond_fg(theta, self.k, self.gram, self.x, self.inner_iter, 1e-15)
        self.x = x
        return v, g

    def dual(self, theta):
        v, _, x, m = K.diag_diamond_fg(theta, self.k, self.gram, self.x, self.inner_iter, 1e-15)
        return v, m

    def split(self, theta):
        nph = self.k * (self.d - 1)
        return theta[:nph].reshape(self.k, self.d - 1).copy(), theta[nph:].copy()

    def witness(self, theta):
        ph, lw = self.split(theta)
        u = K.phase_vectors(theta[: self.k * (self.d - 1)], self.k, self.d)
        return RUChannel(K.softmax(lw), np.array([np.diag(r) for r in u]))


def _best_torus_vector(m, d):
    grid = _torus_grid(d)
    scores = K.torus_scores(np.ascontiguousarray(m), grid)
    i = int(np.argmax(scores))

    def neg(a):
        u = np.exp(1j * np.r_[0.0, a])
        return -float(np.real(np.vdot(u, m @ u)))

    res = minimize(neg, np.angle(grid[i][1:]), method="BFGS", options=dict(gtol=1e-12))
    return -float(res.fun), res.x


def _gram_fit(prob: _DiagonalProblem, theta, cfg):
    """Least squares on the coherence matrix; lands interior channels near zero.

    Dense BFGS: the softmax weights make this badly conditioned, and with a
    few dozen parameters the full inverse Hessian is cheap.
    """
    floor = (FLOOR_FRACTION * cfg.tol / prob.d) ** 2
    res = minimize(
        K.gram_fit_fg,
        theta,
        args=(prob.k, prob.gram),
        jac=True,
        method="BFGS",
        callback=_Stall(cfg.stall_iter, 0.0, floor),
        options=dict(maxiter=GRAM_FIT_ITER, gtol=1e-14),
    )
    return res.x


def _diagonal_stage(prob: _DiagonalProblem, theta, cfg):
    floor = FLOOR_FRACTION * cfg.tol
    res = _lbfgs(prob, theta, cfg, floor=floor)
    theta = res.x
    for _ in range(cfg.exchange_rounds):
        if res.fun < floor:
            break
        _, m = prob.dual(theta)
        gain, phases = _best_torus_vector(m, prob.d)
        ph, lw = prob.split(theta)
        u = K.phase_vectors(theta[: prob.k * (prob.d - 1)], prob.k, prob.d)
        current = np.real(np.einsum("ja,ab,jb->j", u.conj(), m, u)).max()
        if gain <= current + 1e-9:
            break
        p = K.softmax(lw)
        j = int(np.argmin(p))
        ph[j] = phases
        lw[j] = np.log(p.max()) - 2.0
        trial = _lbfgs(prob, np.concatenate([ph.ravel(), lw]), cfg, floor=floor)
        if trial.fun < res.fun:
            res, theta = trial, trial.x
        else:
            break
    return theta, float(res.fun)


def _diagonal_theta_from_unitaries(weights, unitaries, k):
    """Relative diagonal phases and log-weights, padded to k components."""
    diag = np.diagonal(unitaries, axis1=1, axis2=2)
    ph = np.angle(diag[:, 1:]) - np.angle(diag[:, :1])
    lw = np.log(np.maximum(weights, 1e-300))
    order = np.argsort(-weights, kind="stable")[:k]
    ph, lw = ph[order], lw[order]
    if len(lw) < k:
        pad = k - len(lw)
        ph = np.vstack([ph, np.zeros((pad, ph.shape[1]))])
        lw = np.concatenate([lw, np.full(pad, lw.max() + ZERO_LOG_WEIGHT)])
    return np.concatenate([ph.ravel(), lw])


def _general_refine(ch, k, theta_diag, d, cfg):
    """Polish a diagonal solution in the general exp(-iA) parametrization."""
    ph = theta_diag[: k * (d - 1)].reshape(k, d - 1)
    lw = theta_diag[k * (d - 1):]
    theta = np.zeros(k * d * d + k)
    for j in range(k):
        theta[j * d * d + 1:j * d * d + d] = -ph[j]  # exp(-i diag(-phi)) = diag(e^{i phi})
    theta[k * d * d:] = lw
    kb = kron_kraus(kraus_from_gram(ch).kraus)
    state = {"z": np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)}

    def fg(th):
        v, g, z = K.ru_diamond_fg(th, k, kb, state["z"], 2000, 1e-15)
        state["z"] = z
        return v, g

    res = _lbfgs(fg, theta, cfg.replace(max_iter=cfg.refine_iter))
    p, us = K.general_unitaries(res.x, k, d)
    return RUChannel(p, us)


def _evaluate(ch, witness, tol):
    r = diamond_norm_detail(HermitianPreservingMap.difference(ch, witness), tol)
    return r.value, r.converged


def _run_start(ch, k, cfg, rng_seed):
    d = ch.d
    prob = _DiagonalProblem(ch.gram, k)
    rng = np.random.default_rng(rng_seed)
    if cfg.mode == "general":
        theta0 = np.concatenate([rng.normal(size=k * d * d), np.zeros(k)])
        target = np.ascontiguousarray(ch.choi())
        fit = _lbfgs(K.frobenius_fg, theta0, cfg, args=(k, target))
        p, us = K.general_unitaries(fit.x, k, d)
        theta = _diagonal_theta_from_unitaries(p, us, k)
    else:
        theta = np.concatenate([rng.uniform(0, 2 * np.pi, size=k * (d - 1)), np.zeros(k)])
    return _finish(ch, k, cfg, prob, theta)


def _finish(ch, k, cfg, prob, theta):
    theta = _gram_fit(prob, theta, cfg)
    theta, _ = _diagonal_stage(prob, theta, cfg)
    witness = prob.witness(theta)
    value, ok = _evaluate(ch, witness, cfg.tol)
    if cfg.mode == "general" and cfg.refine_iter > 0:
        refined = _general_refine(ch, k, theta, ch.d, cfg)
        v2, ok2 = _evaluate(ch, refined, cfg.tol)
        if v2 < value:
            witness, value, ok = refined, v2, ok2
    return value, witness, ok


def _settled(values, cfg):
    """Enough starts agree on the best value (or two sit below tol)."""
    vals = np.asarray(values)
    best = vals.min()
    if np.sum(vals <= cfg.tol) >= 2:
        return True
    return best > cfg.tol and np.sum(vals <= best * (1 + AGREE_REL)) >= cfg.consensus


def nearest_ru(ch: PhaseDampingChannel, k=None, cfg: OptimizerConfig = None, initial=()) -> DefectResult:
    """Best RU channel with k components found by the multi-start search.

    ``initial`` may hold RU channels (e.g. a previous witness); each is
    evaluated as is and also used as an extra start, so the result never
    exceeds the best of them.
    """
    cfg = cfg or OptimizerConfig()
    k = cfg.k if k is None else int(k)
    if k < 1:
        raise PreconditionError("k must be >= 1")
    if not isinstance(ch, PhaseDampingChannel):
        raise PreconditionError("nearest_ru expects a PhaseDampingChannel")
    values, witnesses, oks, diags = [], [], [], []
    for w in initial:
        try:
            v0, ok0 = _evaluate(ch, w, cfg.tol)
            best = (v0, w, ok0)
            if w.is_diagonal():
                prob = _DiagonalProblem(ch.gram, k)
                theta = _diagonal_theta_from_unitaries(w.weights, w.unitaries, k)
                v1, w1, ok1 = _finish(ch, k, cfg, prob, theta)
                if v1 < v0:
                    best = (v1, w1, ok1)
        except BirkhoffLabError as exc:  # pragma: no cover - defensive
            diags.append(f"initial witness: {exc}")
            continue
        values.append(best[0])
        witnesses.append(best[1])
        oks.append(best[2])
    for i in range(cfg.starts):
        seed = cfg.seed + i
        try:
            v, w, ok = _run_start(ch, k, cfg, seed)
        except (BirkhoffLabError, np.linalg.LinAlgError, FloatingPointError) as exc:
            diags.append(f"start {i} (seed {seed}): {exc}")
            log.debug("start %d failed: %s", i, exc)
            continue
        values.append(v)
        witnesses.append(w)
        oks.append(ok)
        if cfg.consensus and _settled(values, cfg):
            break
    if not values:
        raise OptimizerError("every optimizer start failed", diags)
    i = int(np.argmin(values))
    vals = np.array(values)
    agree = int(np.sum(vals <= vals[i] + cfg.tol)) >= min(2, len(vals))
    return DefectResult(
        d_B=float(values[i]),
        witness=witnesses[i].simplified(min_weight=0.0),
        starts_used=len(values),
        per_start=tuple(float(v) for v in values),
        converged=bool(oks[i] and agree),
        upper_bound_only=cfg.mode == "diagonal",
        diagnostics=tuple(diags),
    )


def defect_series(p: LindbladParams, grid, cfg: OptimizerConfig = None, dt_max=None, channels=None) -> TimeSeries:
    """d_B(t) for the damped channel at every grid time.

    Failed points are left empty and flagged; ``channels`` lets callers reuse
    already integrated channels.
    """
    cfg = cfg or OptimizerConfig()
    grid = check_grid(grid)
    chans = damped_channels(p, grid, dt_max) if channels is None else list(channels)
    out, flags, prev = [], [], None
    for t, ch in zip(grid, chans):
        initial = (prev,) if (cfg.warm_start and prev is not None) else ()
        try:
            res = nearest_ru(ch, cfg.k, cfg, initial)
        except BirkhoffLabError as exc:
            log.warning("d_B failed at t=%g: %s", t, exc)
            out.append(np.nan)
            flags.append("dB_failed")
            prev = None
            continue
        out.append(res.d_B)
        flags.append("" if res.converged else "dB_unconverged")
        prev = res.witness
    return TimeSeries(grid, d_B=np.array(out), flags=flags)
