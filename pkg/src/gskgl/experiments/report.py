"""Run reports, log-log slope fits and CSV emission."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np
from scipy import stats

__all__ = ["SlopeFit", "fit_loglog", "RunReport", "format_value", "package_version"]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    stderr: float
    intercept: float
    points: int


def fit_loglog(x, y) -> SlopeFit | None:
    """Least-squares slope of ``log y`` against ``log x``.

    Returns ``None`` (a degenerate sweep) when fewer than three strictly
    positive finite points are available.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y) & (x > 0) & (y > 0)
    if ok.sum() < 3:
        return None
    res = stats.linregress(np.log(x[ok]), np.log(y[ok]))
    return SlopeFit(float(res.slope), float(res.stderr), float(res.intercept), int(ok.sum()))


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def format_value(v) -> str:
    """Stable text form: repr-exact floats, lowercase booleans, blanks for ``None``."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0  # drops the sign of negative zero
        if math.isnan(v):
            return "nan"
        return repr(v)
    if isinstance(v, (complex, np.complexfloating)):
        return f"{format_value(v.real)}{'+' if v.imag >= 0 else '-'}{format_value(abs(v.imag))}j"
    return str(v)


@dataclass
class RunReport:
    """Rows keyed by column name plus fitted slopes and a pass/fail verdict."""

    experiment: str
    columns: list
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    wall_time: float = 0.0

    def add(self, **row):
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_csv(self, config_hash: str, wall_time: float | None = None) -> str:
        buf = io.StringIO()
        wall = self.wall_time if wall_time is None else wall_time
        buf.write(
            f"# gskgl version={package_version()} experiment={self.experiment} "
            f"config_sha256={config_hash} wall_time_s={wall:.3f}\n"
        )
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"[{self.experiment}]"]
        for name, fit in self.fits.items():
            if fit is None:
                lines.append(f"  {name}: degenerate sweep (no fit)")
            else:
                lines.append(f"  {name}: slope {fit.slope:.4f} +- {fit.stderr:.4f} ({fit.points} points)")
        for name, ok in self.checks.items():
            lines.append(f"  check {name}: {'PASS' if ok else 'FAIL'}")
        lines.extend(f"  {n}" for n in self.notes)
        return "\n".join(lines)
