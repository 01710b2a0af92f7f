"""``birkhoff-lab`` command line front end."""
import argparse
import os
import sys
import tempfile

import numpy as np

from .birkhoff import defect_series
from .config import RunConfig, load_config
from .errors import BirkhoffLabError
from .lindblad import damped_channels, purity_series
from .model import extremality_conditions, volume_time_series
from .series import TimeSeries

COPLANAR_DB_LIMIT = 1e-4  # rows with |V| ~ 0 but d_B above this get flagged

PLOT_SCRIPT = '''"""Plot every populated column of a birkhoff-lab CSV against t."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name!r}
with open(path, newline="") as fh:
    rows = list(csv.DictReader(fh))
t = [float(r["t"]) for r in rows]
cols = [c for c in ("V", "purity", "d_B") if any(r[c] for r in rows)]
fig, axes = plt.subplots(len(cols), 1, sharex=True, squeeze=False, figsize=(6, 2.5 * len(cols)))
for ax, c in zip(axes[:, 0], cols):
    ax.plot(t, [float(r[c]) if r[c] else float("nan") for r in rows])
    ax.set_ylabel(c)
axes[-1, 0].set_xlabel("t")
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''


def cmd_volume(cfg: RunConfig) -> TimeSeries:
    return volume_time_series(cfg.model_params(), cfg.grid())


def cmd_purity(cfg: RunConfig, channels=None) -> TimeSeries:
    if channels is None:
        return purity_series(cfg.lindblad_params(), cfg.rho0_matrix(), cfg.grid(), cfg.dt_max, cfg.tolerances)
    from .core import purity

    rho0 = cfg.rho0_matrix()
    return TimeSeries(cfg.grid(), purity=np.array([purity(ch.apply(rho0)) for ch in channels]))


def cmd_defect(cfg: RunConfig, channels=None) -> TimeSeries:
    return defect_series(cfg.lindblad_params(), cfg.grid(), cfg.optimizer_config(), cfg.dt_max, channels)


def cmd_all(cfg: RunConfig) -> TimeSeries:
    chans = damped_channels(cfg.lindblad_params(), cfg.grid(), cfg.dt_max, cfg.tolerances)
    ts = cmd_volume(cfg).merged(cmd_purity(cfg, chans)).merged(cmd_defect(cfg, chans))
    flags = list(ts.flags)
    for i, (v, d) in enumerate(zip(ts.V, ts.d_B)):
        if abs(v) <= cfg.tolerances.coplanar and d > COPLANAR_DB_LIMIT:
            flags[i] = ";".join(x for x in (flags[i], "coplanar_dB_high") if x)
    return TimeSeries(ts.t, V=ts.V, purity=ts.purity, d_B=ts.d_B, flags=flags)


def cmd_validate(cfg: RunConfig, out=None):
    out = out or sys.stdout
    rep = extremality_conditions(cfg.model_params())
    print(f"(I) asymmetric coupling:  {rep.asymmetric_coupling}", file=out)
    print(f"(II) transverse field:    {rep.transverse_field}", file=out)
    print(f"(III) longitudinal field: {rep.longitudinal_field}", file=out)
    verdict = "extremal channel expected at generic times" if rep.all_met else "RU for all t"
    print(f"verdict: {verdict}", file=out)
    return rep, verdict


COMMANDS = {"volume": cmd_volume, "purity": cmd_purity, "defect": cmd_defect, "all": cmd_all}


def write_atomic(path, text):
    """Write via a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".birkhoff-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _print_summary(ts, out):
    print(f"rows: {len(ts)}", file=out)
    for name, lo, hi in ts.summary():
        print(f"{name}: min {lo:.6g} max {hi:.6g}", file=out)
    flagged = sum(1 for f in ts.flags if f)
    if flagged:
        print(f"flagged rows: {flagged}", file=out)


def build_parser():
    ap = argparse.ArgumentParser(prog="birkhoff-lab", description="Phase damping channels from a three-qubit model.")
    ap.add_argument("command", choices=[*COMMANDS, "validate"])
    ap.add_argument("--config", help="flat key = value config file (defaults if omitted)")
    ap.add_argument("--out", help="CSV output path (overrides the config's output key)")
    ap.add_argument("--plot-script", action="store_true", help="also write a matplotlib script next to the CSV")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
    except (OSError, BirkhoffLabError) as exc:
        print(f"birkhoff-lab: config error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        cmd_validate(cfg)
        return 0
    out_path = args.out or cfg.output or f"{args.command}.csv"
    try:
        ts = COMMANDS[args.command](cfg)
        write_atomic(out_path, ts.to_csv_text())
        if args.plot_script:
            base = os.path.splitext(out_path)[0]
            write_atomic(base + "_plot.py", PLOT_SCRIPT.format(csv_name=os.path.basename(out_path)))
    except (BirkhoffLabError, OSError, ValueError) as exc:
        print(f"birkhoff-lab: {args.command} failed: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out_path}")
    _print_summary(ts, sys.stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
