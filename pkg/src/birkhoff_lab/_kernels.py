"""Hot numerical kernels.

Every function here is plain numpy code restricted to the subset numba
compiles; :func:`birkhoff_lab._backend.jit` decides at import time whether
they are compiled. Callers must pass contiguous complex128/float64 arrays.
"""
import numpy as np

from ._backend import jit


@jit
def sign_decompose(x):
    """Trace norm of Hermitian ``x`` and its sign matrix ``sign(x)``."""
    w, v = np.linalg.eigh(x)
    s = np.sign(w)
    sv = np.ascontiguousarray(v * s)
    return np.sum(np.abs(w)), sv @ np.ascontiguousarray(v.conj().T)


# ---------------------------------------------------------------- diamond norm
# State on system (x) ancilla is a vector z of length d*d (system index first).
# kb[i] = kron(K_i, 1_d); signs[i] = +1 for the minuend, -1 for the subtrahend.


@jit
def output_operator(kb, signs, z):
    n = z.shape[0]
    x = np.zeros((n, n), dtype=np.complex128)
    for i in range(kb.shape[0]):
        y = kb[i] @ z
        x += signs[i] * np.outer(y, y.conj())
    return x


@jit
def adjoint_action(kb, signs, w):
    n = w.shape[0]
    a = np.zeros((n, n), dtype=np.complex128)
    for i in range(kb.shape[0]):
        kh = np.ascontiguousarray(kb[i].conj().T)
        a += signs[i] * (kh @ w @ kb[i])
    return a


@jit
def diamond_ascent(kb, signs, z0, max_iter, tol):
    """Monotone alternating ascent of ||(Delta (x) id)(zz^+)||_1 over unit z."""
    z = z0 / np.linalg.norm(z0)
    prev = -1.0
    it = 0
    for it in range(max_iter):
        val, w = sign_decompose(output_operator(kb, signs, z))
        ev, evec = np.linalg.eigh(adjoint_action(kb, signs, w))
        z = np.ascontiguousarray(evec[:, -1])
        if val - prev < tol:
            break
        prev = val
    val, w = sign_decompose(output_operator(kb, signs, z))
    return val, z, w, it + 1


@jit
def diamond_polish_fg(xr, kb, signs):
    """Negated objective and gradient in stacked (Re, Im) coordinates."""
    n = xr.shape[0] // 2
    z = xr[:n] + 1j * xr[n:]
    nz = np.real(np.vdot(z, z))
    val, w = sign_decompose(output_operator(kb, signs, z))
    f = val / nz
    g = 2.0 * (adjoint_action(kb, signs, w) @ z) / nz - 2.0 * f * z / nz
    out = np.empty(2 * n)
    out[:n] = -g.real
    out[n:] = -g.imag
    return -f, out


# ------------------------------------------------------------ Schur multipliers


@jit
def schur_ascent(a, x0, max_iter, tol):
    """max over unit real x of ||D_x a D_x||_1 by alternating sign/eigvec steps.

    For a difference of two diagonal-unitary mixtures with coherence matrix
    ``a`` this is the diamond norm.
    """
    x = np.abs(x0) / np.linalg.norm(x0)
    prev = -1.0
    it = 0
    for it in range(max_iter):
        val, s = sign_decompose(np.outer(x, x) * a)
        k = np.ascontiguousarray((a * s.T).real)
        ev, evec = np.linalg.eigh(k)
        x = np.abs(evec[:, -1])
        if val - prev < tol:
            break
        prev = val
    val, s = sign_decompose(np.outer(x, x) * a)
    return val, x, s, it + 1


# ------------------------------------------------ unitary parametrization U=e^{-iA}


@jit
def herm_from_params(th, d):
    a = np.zeros((d, d), dtype=np.complex128)
    m = d * (d - 1) // 2
    for i in range(d):
        a[i, i] = th[i]
    c = 0
    for i in range(d):
        for j in range(i + 1, d):
            v = th[d + c] + 1j * th[d + m + c]
            a[i, j] = v
            a[j, i] = np.conj(v)
            c += 1
    return a


@jit
def expm_with_frechet(a):
    """U = exp(-i a) plus the eigenbasis and divided differences of exp(-i.)."""
    lam, v = np.linalg.eigh(a)
    d = lam.shape[0]
    e = np.exp(-1j * lam)
    u = np.ascontiguousarray(v * e) @ np.ascontiguousarray(v.conj().T)
    f = np.empty((d, d), dtype=np.complex128)
    for j in range(d):
        for k in range(d):
            dl = lam[j] - lam[k]
            if abs(dl) > 1e-9:
                f[j, k] = (e[j] - e[k]) / dl
            else:
                f[j, k] = -1j * e[j]
    return u, np.ascontiguousarray(v), f


@jit
def herm_param_grad(e, v, f):
    """Gradient of Re tr(e^+ dU) with respect to the Hermitian parameters."""
    d = v.shape[0]
    vh = np.ascontiguousarray(v.conj().T)
    b = (vh @ e @ v) * np.conj(f)
    c = v @ b @ vh
    g = (c + c.conj().T) / 2
    m = d * (d - 1) // 2
    out = np.empty(d * d)
    for i in range(d):
        out[i] = g[i, i].real
    idx = 0
    for i in range(d):
        for j in range(i + 1, d):
            out[d + idx] = 2.0 * g[i, j].real
            out[d + m + idx] = 2.0 * g[i, j].imag
            idx += 1
    return out


@jit
def softmax(lw):
    p = np.exp(lw - np.max(lw))
    return p / np.sum(p)


@jit
def softmax_grad(p, gp):
    return p * (gp - np.dot(p, gp))


@jit
def general_unitaries(theta, k, d):
    us = np.empty((k, d, d), dtype=np.complex128)
    for j in range(k):
        a = herm_from_params(theta[j * d * d:(j + 1) * d * d], d)
        u, v, f = expm_with_frechet(a)
        us[j] = u
    return softmax(theta[k * d * d:]), us


@jit
def frobenius_fg(theta, k, target_choi):
    """||J - sum_j p_j vec(U_j) vec(U_j)^+||_F^2 and its gradient."""
    n = target_choi.shape[0]
    d = int(np.round(np.sqrt(n)))
    p = softmax(theta[k * d * d:])
    vs = np.empty((k, n), dtype=np.complex128)
    vees = np.empty((k, d, d), dtype=np.complex128)
    fs = np.empty((k, d, d), dtype=np.complex128)
    diff = target_choi.copy()
    for j in range(k):
        u, v, f = expm_with_frechet(herm_from_params(theta[j * d * d:(j + 1) * d * d], d))
        vees[j] = v
        fs[j] = f
        vs[j] = u.copy().reshape(n)
        diff -= p[j] * np.outer(vs[j], vs[j].conj())
    val = np.sum(np.abs(diff) ** 2)
    grad = np.empty(theta.shape[0])
    gp = np.empty(k)
    for j in range(k):
        dv = diff @ vs[j]
        gp[j] = -2.0 * np.real(np.vdot(vs[j], dv))
        e = -4.0 * p[j] * dv.reshape(d, d)
        grad[j * d * d:(j + 1) * d * d] = herm_param_grad(e, vees[j], fs[j])
    grad[k * d * d:] = softmax_grad(p, gp)
    return val, grad


@jit
def ru_diamond_fg(theta, k, kb_target, z0, max_iter, tol):
    """Diamond distance from a fixed channel to a general k-unitary mixture.

    Danskin gradient at the inner maximizer found by warm-started ascent.
    """
    r = kb_target.shape[0]
    n = kb_target.shape[1]
    d = int(np.round(np.sqrt(n)))
    p = softmax(theta[k * d * d:])
    eye = np.eye(d, dtype=np.complex128)
    kb = np.empty((r + k, n, n), dtype=np.complex128)
    signs = np.empty(r + k)
    vees = np.empty((k, d, d), dtype=np.complex128)
    fs = np.empty((k, d, d), dtype=np.complex128)
    ubig = np.empty((k, n, n), dtype=np.complex128)
    for i in range(r):
        kb[i] = kb_target[i]
        signs[i] = 1.0
    for j in range(k):
        u, v, f = expm_with_frechet(herm_from_params(theta[j * d * d:(j + 1) * d * d], d))
        vees[j] = v
        fs[j] = f
        ubig[j] = np.kron(u, eye)
        kb[r + j] = np.sqrt(p[j]) * ubig[j]
        signs[r + j] = -1.0
    val, z, w, its = diamond_ascent(kb, signs, z0, max_iter, tol)
    mz = z.copy().reshape(d, d)
    mzh = np.ascontiguousarray(mz.conj().T)
    grad = np.empty(theta.shape[0])
    gp = np.empty(k)
    for j in range(k):
        phi = ubig[j] @ z
        wphi = w @ phi
        gp[j] = -np.real(np.vdot(phi, wphi))
        e = -2.0 * p[j] * (wphi.reshape(d, d) @ mzh)
        grad[j * d * d:(j + 1) * d * d] = herm_param_grad(e, vees[j], fs[j])
    grad[k * d * d:] = softmax_grad(p, gp)
    return val, grad, z


# ------------------------------------------------------ diagonal (phase) mixtures


@jit
def phase_vectors(phases, k, d):
    u = np.ones((k, d), dtype=np.complex128)
    for j in range(k):
        for a in range(1, d):
            u[j, a] = np.exp(1j * phases[j * (d - 1) + a - 1])
    return u


@jit
def coherence_of_mixture(p, u):
    d = u.shape[1]
    h = np.zeros((d, d), dtype=np.complex128)
    for j in range(u.shape[0]):
        h += p[j] * np.outer(u[j], u[j].conj())
    return h


@jit
def gram_fit_fg(theta, k, gram):
    """||sum_j p_j u_j u_j^+ - G||_F^2 over phases and log-weights, with gradient."""
    d = gram.shape[0]
    nph = k * (d - 1)
    p = softmax(theta[nph:])
    u = phase_vectors(theta[:nph], k, d)
    r = coherence_of_mixture(p, u) - gram
    val = np.sum(np.abs(r) ** 2)
    grad = np.empty(theta.shape[0])
    gp = np.empty(k)
    for j in range(k):
        w = r @ u[j]
        gp[j] = 2.0 * np.real(np.vdot(u[j], w))
        for a_ in range(1, d):
            grad[j * (d - 1) + a_ - 1] = -4.0 * p[j] * np.imag(np.conj(w[a_]) * u[j, a_])
    grad[nph:] = softmax_grad(p, gp)
    return val, grad


@jit
def diag_diamond_fg(theta, k, gram, x_warm, max_iter, tol):
    """Diamond distance from a phase damping channel to a diagonal k-mixture.

    theta holds (d-1) relative phases per unitary followed by k log-weights.
    Returns value, gradient, the inner maximizer x and the dual matrix M.
    """
    d = gram.shape[0]
    nph = k * (d - 1)
    p = softmax(theta[nph:])
    u = phase_vectors(theta[:nph], k, d)
    a = gram - coherence_of_mixture(p, u)
    # concave in x**2 (zero-diagonal a), so one warm-started ascent suffices
    val, x, s, its = schur_ascent(a, x_warm, max_iter, tol)
    m = np.outer(x, x) * s
    grad = np.empty(theta.shape[0])
    gp = np.empty(k)
    for j in range(k):
        mu = m @ u[j]
        gp[j] = -np.real(np.vdot(u[j], mu))
        for a_ in range(1, d):
            grad[j * (d - 1) + a_ - 1] = -p[j] * 2.0 * np.imag(np.conj(u[j, a_]) * mu[a_])
    grad[nph:] = softmax_grad(p, gp)
    return val, grad, x, m


@jit
def torus_scores(m, grid):
    """Re(u^+ m u) for every row u of ``grid``."""
    mu = grid @ np.ascontiguousarray(m.T)
    return np.sum(np.real(np.conj(grid) * mu), axis=1)


# ------------------------------------------------------------- linear RK4


@jit
def _rk4_step(l, y, h):
    k1 = l @ y
    k2 = l @ (y + 0.5 * h * k1)
    k3 = l @ (y + 0.5 * h * k2)
    k4 = l @ (y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@jit
def rk4_linear(l, y0, times, dt_max, tol, dt_min):
    """Integrate Y' = l Y from t=0, recording Y at each of ``times``.

    Classic RK4 with step doubling: each step is compared against two half
    steps and halved until the difference is below ``tol`` (relative to
    max(1, |Y|)). Returns (out, ok, t_reached).
    """
    nt = times.shape[0]
    out = np.zeros((nt, y0.shape[0], y0.shape[1]), dtype=np.complex128)
    y = y0.copy()
    t = 0.0
    h = dt_max
    for i in range(nt):
        target = times[i]
        while target - t > 1e-15 * max(1.0, abs(target)):
            step = min(h, dt_max)
            truncated = target - t < step
            if truncated:
                step = target - t
            first = step
            while True:
                full = _rk4_step(l, y, step)
                half = _rk4_step(l, _rk4_step(l, y, 0.5 * step), 0.5 * step)
                err = np.max(np.abs(half - full))
                scale = max(1.0, np.max(np.abs(half)))
                if err <= tol * scale:
                    break
                step = 0.5 * step
                if step < dt_min:
                    return out, False, t
            y = half
            t = t + step
            if err < tol * scale / 64.0:
                if not truncated or step < first:
                    h = min(dt_max, 2.0 * step)
            else:
                h = step
        t = target
        out[i] = y
    return out, True, t
