"""The numba and pure-numpy kernel paths must agree to rounding."""
import json
import os
import subprocess
import sys

import numpy as np

import birkhoff_lab._backend as backend

PROBE = r"""
import json
import numpy as np
from birkhoff_lab import _backend, _kernels as K
from birkhoff_lab.diamond import diamond_distance
from birkhoff_lab.channels import RUChannel
from birkhoff_lab.lindblad import LindbladParams, dephasing_coefficients_series
from birkhoff_lab.model import ModelParams, channel_at

rng = np.random.default_rng(7)
ch = channel_at(ModelParams(), 1.5)
ru = RUChannel([0.5, 0.5], np.array([np.eye(4), np.diag([1, -1, 1, -1])]))
theta = rng.normal(size=3 * 3 + 3)
val, grad, _, _ = K.diag_diamond_fg(theta, 3, ch.gram, np.full(4, 0.5), 200, 1e-12)
coef = dephasing_coefficients_series(LindbladParams(ModelParams(), 0.3), np.array([0.0, 1.0, 2.5]))
print(json.dumps({
    "backend": _backend.BACKEND,
    "diamond": diamond_distance(ch, ru),
    "diag_val": float(val),
    "diag_grad": [float(g) for g in grad],
    "coef": [float(x) for x in np.concatenate([coef.real.ravel(), coef.imag.ravel()])],
}))
"""


def run_probe(disable):
    env = dict(os.environ)
    env["BIRKHOFF_LAB_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run([sys.executable, "-c", PROBE], env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_env_flag_selects_backend_and_results_agree():
    fast, slow = run_probe(False), run_probe(True)
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    assert abs(fast["diamond"] - slow["diamond"]) <= 1e-9
    assert abs(fast["diag_val"] - slow["diag_val"]) <= 1e-9
    assert np.allclose(fast["diag_grad"], slow["diag_grad"], atol=1e-8)
    assert np.allclose(fast["coef"], slow["coef"], atol=1e-12)


def test_jit_passthrough_when_disabled(monkeypatch):
    monkeypatch.setattr(backend, "USE_NUMBA", False)

    def f(x):
        return x + 1

    assert backend.jit(f) is f
