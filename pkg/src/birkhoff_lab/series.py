"""Time-series records and their CSV form.

Floats are written with 17 significant digits so that reading a file back
gives the identical binary values. Missing values are empty fields.
"""
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError

COLUMNS = ("V", "purity", "d_B")
HEADER = "t,V,purity,d_B,flags"


def fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def _column(values, n, name):
    if values is None:
        return None
    a = np.asarray(values, dtype=float).ravel()
    if a.shape[0] != n:
        raise PreconditionError(f"column {name} has {a.shape[0]} entries, expected {n}")
    return a


@dataclass
class TimeSeries:
    t: np.ndarray
    V: np.ndarray = None
    purity: np.ndarray = None
    d_B: np.ndarray = None
    flags: list = field(default=None)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float).ravel()
        n = self.t.shape[0]
        if n and np.any(np.diff(self.t) <= 0):
            raise PreconditionError("times must be strictly increasing")
        for name in COLUMNS:
            setattr(self, name, _column(getattr(self, name), n, name))
        if self.flags is None:
            self.flags = [""] * n
        elif len(self.flags) != n:
            raise PreconditionError("flags column has the wrong length")
        for f in self.flags:
            if "," in f or "\n" in f:
                raise PreconditionError(f"flag text may not contain commas or newlines: {f!r}")

    def __len__(self):
        return self.t.shape[0]

    def merged(self, other: "TimeSeries") -> "TimeSeries":
        """Combine columns of two series sampled on the same times."""
        if len(self) != len(other) or np.any(self.t != other.t):
            raise PreconditionError("cannot merge series on different grids")
        cols = {}
        for name in COLUMNS:
            a, b = getattr(self, name), getattr(other, name)
            if a is not None and b is not None:
                raise PreconditionError(f"both series define column {name}")
            cols[name] = a if a is not None else b
        flags = [";".join(x for x in (f, g) if x) for f, g in zip(self.flags, other.flags)]
        return TimeSeries(self.t, flags=flags, **cols)

    def rows(self):
        for i, t in enumerate(self.t):
            vals = [fmt(t)]
            for name in COLUMNS:
                col = getattr(self, name)
                vals.append("" if col is None else fmt(col[i]))
            vals.append(self.flags[i])
            yield ",".join(vals)

    def to_csv_text(self) -> str:
        return HEADER + "\n" + "".join(r + "\n" for r in self.rows())

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "TimeSeries":
        lines = io.StringIO(text).read().split("\n")
        if not lines or lines[0] != HEADER:
            raise PreconditionError(f"unexpected CSV header {lines[0]!r}")
        body = [ln for ln in lines[1:] if ln != ""]
        t, cols, flags = [], {c: [] for c in COLUMNS}, []
        for ln in body:
            parts = ln.split(",")
            if len(parts) != 5:
                raise PreconditionError(f"malformed CSV row {ln!r}")
            t.append(float(parts[0]))
            for c, raw in zip(COLUMNS, parts[1:4]):
                cols[c].append(float(raw) if raw else math.nan)
            flags.append(parts[4])
        kw = {}
        for c, vals in cols.items():
            kw[c] = None if all(math.isnan(v) for v in vals) else np.array(vals)
        return cls(np.array(t), flags=flags, **kw)

    @classmethod
    def read_csv(cls, path) -> "TimeSeries":
        with open(path, encoding="utf-8", newline="") as fh:
            return cls.from_csv_text(fh.read())

    def summary(self):
        """(name, min, max) per populated column, ignoring missing values."""
        out = [("t", float(self.t.min()), float(self.t.max()))] if len(self) else []
        for name in COLUMNS:
            col = getattr(self, name)
            if col is None or np.all(np.isnan(col)):
                continue
            out.append((name, float(np.nanmin(col)), float(np.nanmax(col))))
        return out
