import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from birkhoff_lab.config import RunConfig, load_config, parse_config
from birkhoff_lab.errors import ConfigError, PreconditionError
from birkhoff_lab.series import HEADER, TimeSeries

finite = st.floats(allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(finite, finite, finite), min_size=1, max_size=30))
def test_csv_round_trip_is_bit_exact(cols):
    n = len(cols)
    v, p, d = (np.array(c) for c in zip(*cols))
    ts = TimeSeries(np.arange(n) * 0.1 + 1e-3, V=v, purity=p, d_B=d)
    back = TimeSeries.from_csv_text(ts.to_csv_text())
    for name in ("t", "V", "purity", "d_B"):
        assert np.array_equal(getattr(back, name), getattr(ts, name))
        assert getattr(back, name).tobytes() == getattr(ts, name).tobytes()


def test_csv_layout_and_gaps():
    ts = TimeSeries([0.0, 0.5], V=[0.1, -0.0], d_B=[np.nan, 0.25], flags=["", "dB_failed"])
    text = ts.to_csv_text()
    lines = text.split("\n")
    assert lines[0] == HEADER
    assert "\r" not in text and text.endswith("\n")
    assert lines[1] == "0,0.10000000000000001,,,"
    assert lines[2] == "0.5,-0,,0.25,dB_failed"
    back = TimeSeries.from_csv_text(text)
    assert back.purity is None and math.isnan(back.d_B[0]) and back.flags == ["", "dB_failed"]


def test_csv_file_round_trip(tmp_path):
    ts = TimeSeries(np.linspace(0, 1, 7), purity=np.linspace(0.25, 1, 7) ** 3)
    path = tmp_path / "x.csv"
    ts.write_csv(path)
    assert TimeSeries.read_csv(path).purity.tobytes() == ts.purity.tobytes()


def test_series_validation():
    with pytest.raises(PreconditionError):
        TimeSeries([0.0, 0.0])
    with pytest.raises(PreconditionError):
        TimeSeries([0.0, 1.0], V=[1.0])
    with pytest.raises(PreconditionError):
        TimeSeries([0.0], flags=["a,b"])
    a, b = TimeSeries([0, 1], V=[1, 2]), TimeSeries([0, 1], purity=[1, 1], flags=["x", ""])
    m = a.merged(b)
    assert m.V.tolist() == [1, 2] and m.flags == ["x", ""]
    with pytest.raises(PreconditionError):
        a.merged(a)


def test_empty_config_gives_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert (cfg.gamma_decay, cfg.t_max, cfg.n_steps, cfg.seed) == (0.0, 10.0, 1000, 1)
    m = cfg.model_params()
    assert (m.omega1, m.omega2, m.kappa1, m.kappa2) == (1.0, 0.5, 1.0, 0.5)
    assert m.gamma_vec == (1.0, 0.0, 0.5)
    assert len(cfg.grid()) == 1001


def test_single_key_and_comments():
    cfg = parse_config("# header\nkappa1 = 1.0   # trailing\n\n")
    assert cfg == RunConfig(kappa1=1.0)
    cfg = parse_config("defect.k = 4\ndefect.mode = diagonal\ntol.coplanar = 1e-7\nrho0 = mixed\n")
    assert cfg.optimizer_config().k == 4 and cfg.optimizer_config().mode == "diagonal"
    assert cfg.tolerances.coplanar == 1e-7
    assert np.allclose(cfg.rho0_matrix(), np.eye(4) / 4)


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as info:
        parse_config("omega1 = 2\nkapa1 = 1.0\n")
    assert info.value.key == "kapa1" and info.value.line == 2
    assert "kapa1" in str(info.value)


@pytest.mark.parametrize(
    "text,key",
    [
        ("n_steps = 0", "n_steps"),
        ("t_max = -1", "t_max"),
        ("gamma_decay = -0.1", "gamma_decay"),
        ("omega1 = abc", "omega1"),
        ("omega1 = nan", "omega1"),
        ("defect.mode = random", "defect.mode"),
        ("tol.trace = 0", "tol.trace"),
        ("seed = 1.5", "seed"),
    ],
)
def test_bad_values_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key


def test_syntax_errors_carry_line_numbers():
    with pytest.raises(ConfigError) as info:
        parse_config("omega1 = 1\n\njust words\n")
    assert info.value.line == 3
    with pytest.raises(ConfigError) as info:
        parse_config("seed = 1\nseed = 2\n")
    assert info.value.line == 2


def test_psi0_normalization_policy():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cfg = parse_config("psi0_re0 = 1.0000000001")
    assert abs(np.linalg.norm(cfg.psi0()) - 1) <= 1e-15
    with pytest.warns(UserWarning):
        cfg = parse_config("psi0_re0 = 1.0000005")
    assert abs(np.linalg.norm(cfg.psi0()) - 1) <= 1e-15
    with pytest.raises(ConfigError):
        parse_config("psi0_re0 = 1.01")
    with pytest.raises(ConfigError):
        parse_config("psi0_re0 = 0")
    cfg = parse_config(f"psi0_re0 = {2 ** -0.5}\npsi0_im1 = {2 ** -0.5}")
    assert np.allclose(cfg.psi0(), [2**-0.5, 1j * 2**-0.5])


def test_load_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("gamma_decay = 0.5\noutput = out.csv\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.lindblad_params().gamma == 0.5 and cfg.output == "out.csv"
