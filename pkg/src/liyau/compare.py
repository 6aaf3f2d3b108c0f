"""Tightness orderings between estimates.

An estimate is at least as strong as another at (h, t) when the largest
gradient it allows there is no larger. ``dominance`` samples that pointwise
comparison on a (t, h) grid.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .catalog import Estimate, bbg_h_lower_limit, max_allowed_gradient
from .errors import ConfigError
from .kernels import Kernel, verify_estimate

__all__ = [
    "DOMINANCE_MARGIN",
    "DominanceRow",
    "DominanceReport",
    "ProfileRow",
    "SlackProfile",
    "default_h_grid",
    "dominance",
    "slack_profile",
    "emit_csv",
    "read_csv",
]

DOMINANCE_MARGIN = 1e-9
H_SPAN = 10.0
H_POINTS = 100
# keeps the bbg grid off the pole of its cot branch
BBG_EDGE = 1e-6


def _shared_params(e1: Estimate, e2: Estimate):
    p, q = e1.params, e2.params
    if not (math.isclose(p.K, q.K, abs_tol=1e-12) and math.isclose(p.n, q.n, abs_tol=1e-12)):
        raise ConfigError(f"{e1.id} has (K={p.K:g}, n={p.n:g}) but {e2.id} has (K={q.K:g}, n={q.n:g})")
    return p


def _h_interval(estimates: Sequence[Estimate], t: float):
    p = estimates[0].params
    lo = -H_SPAN * p.n / (2 * t)
    hi = H_SPAN * p.n / (2 * t)
    for e in estimates:
        if e.kind == "bbg":
            limit = bbg_h_lower_limit(p, t)
            lo = max(lo, limit + BBG_EDGE * max(1.0, abs(limit)))
    return lo, hi


def default_h_grid(e1: Estimate, e2: Estimate, t: float, points: int = H_POINTS) -> np.ndarray:
    """``points`` values spanning +-10 n/2t, cut to the shared validity domain."""
    lo, hi = _h_interval((e1, e2), t)
    if not lo < hi:
        raise ConfigError(f"{e1.id} and {e2.id} share no h-range at t={t!r}")
    return np.linspace(lo, hi, points)


@dataclass(frozen=True)
class DominanceRow:
    t: float
    h: float
    ceiling_e1: float
    ceiling_e2: float

    @property
    def diff(self) -> float:
        return self.ceiling_e1 - self.ceiling_e2


@dataclass
class DominanceReport:
    e1: str
    e2: str
    K: float
    n: float
    rows: List[DominanceRow] = field(default_factory=list)

    @property
    def t_grid(self):
        return sorted({r.t for r in self.rows})

    @property
    def max_diff(self) -> float:
        return max((r.diff for r in self.rows), default=math.nan)

    @property
    def holds(self) -> bool:
        return bool(self.rows) and self.max_diff <= DOMINANCE_MARGIN

    @property
    def verdict(self) -> str:
        return f"{self.e1} <= {self.e2}" if self.holds else f"{self.e1} not <= {self.e2}"

    def argmax(self):
        row = max(self.rows, key=lambda r: r.diff)
        return row.t, row.h


def dominance(e1: Estimate, e2: Estimate, t_grid: Sequence[float],
              h_grid: Optional[Sequence[float]] = None, h_points: int = H_POINTS) -> DominanceReport:
    """Compare gradient ceilings of ``e1`` and ``e2`` at every (t, h).

    Without ``h_grid`` each t gets its own default grid. A supplied grid is
    clipped to the part where both estimates are defined.
    """
    p = _shared_params(e1, e2)
    report = DominanceReport(e1.label(), e2.label(), p.K, p.n)
    for t in sorted(float(v) for v in t_grid):
        if h_grid is None:
            hs = default_h_grid(e1, e2, t, h_points)
        else:
            lo, _ = _h_interval((e1, e2), t)
            hs = [float(h) for h in h_grid if h > lo]
        if len(hs) == 0:
            raise ConfigError(f"no h-grid point lies in the shared domain at t={t!r}")
        for h in sorted(hs):
            c1 = max_allowed_gradient(e1, float(h), t).value
            c2 = max_allowed_gradient(e2, float(h), t).value
            report.rows.append(DominanceRow(t, float(h), c1, c2))
    return report


@dataclass(frozen=True)
class ProfileRow:
    t: float
    r: float
    slack: float


@dataclass
class SlackProfile:
    kernel: str
    estimate: str
    rows: List[ProfileRow] = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([r.slack for r in self.rows])


def slack_profile(e: Estimate, k: Kernel, t_grid: Sequence[float], r_grid: Sequence[float]) -> SlackProfile:
    """Minimum over ``r_grid`` of the kernel slack, for each t."""
    out = SlackProfile(k.id, e.label())
    for t in t_grid:
        rep = verify_estimate(k, e, r_grid, [t])
        r_min, _ = rep.argmin
        out.rows.append(ProfileRow(float(t), r_min, rep.min_slack))
    return out


def _header(report):
    if isinstance(report, DominanceReport):
        return ["t", "h", "ceiling_e1", "ceiling_e2", "diff"]
    if isinstance(report, SlackProfile):
        return ["t", "r", "min_slack"]
    raise TypeError(f"cannot serialize {type(report).__name__}")


def emit_csv(report) -> str:
    """CSV text, rows ordered by t then h (or r). Floats use repr, so they round-trip."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(_header(report))
    if isinstance(report, DominanceReport):
        for r in sorted(report.rows, key=lambda r: (r.t, r.h)):
            w.writerow([repr(r.t), repr(r.h), repr(r.ceiling_e1), repr(r.ceiling_e2), repr(r.diff)])
    else:
        for r in sorted(report.rows, key=lambda r: (r.t, r.r)):
            w.writerow([repr(r.t), repr(r.r), repr(r.slack)])
    return buf.getvalue()


def read_csv(text: str, like):
    """Rebuild a report of the same kind as ``like`` from ``emit_csv`` output."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != _header(like):
        raise ConfigError("CSV header does not match the report type")
    if isinstance(like, DominanceReport):
        out = DominanceReport(like.e1, like.e2, like.K, like.n)
        out.rows = [DominanceRow(float(t), float(h), float(a), float(b)) for t, h, a, b, _ in rows[1:]]
    else:
        out = SlackProfile(like.kernel, like.estimate)
        out.rows = [ProfileRow(float(t), float(r), float(s)) for t, r, s in rows[1:]]
    return out
