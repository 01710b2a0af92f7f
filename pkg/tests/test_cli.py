import io

import numpy as np
import pytest

import birkhoff_lab.cli as cli
from birkhoff_lab.cli import cmd_all, cmd_purity, cmd_validate, cmd_volume, main
from birkhoff_lab.config import parse_config
from birkhoff_lab.errors import IntegrityError
from birkhoff_lab.series import TimeSeries


def validate_text(cfg_text):
    buf = io.StringIO()
    rep, verdict = cmd_validate(parse_config(cfg_text), buf)
    return rep, verdict, buf.getvalue()


def test_validate_verdicts():
    rep, verdict, text = validate_text("")
    assert rep.all_met and verdict == "extremal channel expected at generic times"
    assert text.count("True") == 3
    rep, verdict, _ = validate_text("kappa2 = 1.0")
    assert not rep.asymmetric_coupling and verdict == "RU for all t"
    rep, _, _ = validate_text("gamma_z = 0")
    assert not rep.longitudinal_field and rep.asymmetric_coupling


def test_volume_symmetric_coupling_all_zero():
    ts = cmd_volume(parse_config("kappa2 = 1.0\nn_steps = 200"))
    assert len(ts) == 201 and np.max(np.abs(ts.V)) <= 1e-10


def test_purity_mixed_is_constant():
    ts = cmd_purity(parse_config("rho0 = mixed\ngamma_decay = 0.5\nn_steps = 50"))
    assert np.allclose(ts.purity, 0.25, atol=1e-12)


def test_all_rows_and_columns():
    cfg = parse_config("n_steps = 200\nt_max = 2\ndefect.starts = 2\ndefect.k = 4")
    ts = cmd_all(cfg)
    assert len(ts) == 201
    for col in (ts.V, ts.purity, ts.d_B):
        assert col is not None and not np.any(np.isnan(col))
    assert ts.d_B[0] <= 1e-6 and ts.purity[0] == pytest.approx(1.0)


def test_main_writes_csv_and_plot_script(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n_steps = 20\nt_max = 1\ndefect.starts = 1\ndefect.k = 3\n")
    out = tmp_path / "res.csv"
    assert main(["all", "--config", str(cfg), "--out", str(out), "--plot-script"]) == 0
    ts = TimeSeries.read_csv(out)
    assert len(ts) == 21
    assert (tmp_path / "res_plot.py").read_text().startswith('"""Plot')
    stdout = capsys.readouterr().out
    assert "rows: 21" in stdout and "d_B: min" in stdout
    assert not [p for p in tmp_path.iterdir() if p.name.endswith(".tmp")]


def test_main_validate_and_config_errors(tmp_path, capsys):
    assert main(["validate"]) == 0
    assert "verdict" in capsys.readouterr().out
    bad = tmp_path / "bad.cfg"
    bad.write_text("kapa1 = 1.0\n")
    assert main(["volume", "--config", str(bad)]) == 2
    assert "kapa1" in capsys.readouterr().err
    assert main(["volume", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_failure_removes_partial_output(tmp_path, monkeypatch, capsys):
    out = tmp_path / "res.csv"
    out.write_text("stale")

    def broken(cfg):
        raise IntegrityError("synthetic")

    monkeypatch.setitem(cli.COMMANDS, "volume", broken)
    assert main(["volume", "--out", str(out)]) == 1
    assert "synthetic" in capsys.readouterr().err
    assert out.read_text() == "stale"
    assert [p.name for p in tmp_path.iterdir()] == ["res.csv"]

    monkeypatch.setitem(cli.COMMANDS, "volume", cmd_volume)
    real_fdopen = cli.os.fdopen

    class Exploding:
        def __init__(self, fd, *a, **k):
            self.fh = real_fdopen(fd, *a, **k)

        def __enter__(self):
            return self

        def __exit__(self, *exc):
            self.fh.close()

        def write(self, text):
            self.fh.write(text[:10])
            raise OSError("disk full")

    monkeypatch.setattr(cli.os, "fdopen", Exploding)
    cfg = tmp_path / "small.cfg"
    cfg.write_text("n_steps = 5\n")
    assert main(["volume", "--config", str(cfg), "--out", str(tmp_path / "new.csv")]) == 1
    assert sorted(p.name for p in tmp_path.iterdir()) == ["res.csv", "small.cfg"]
