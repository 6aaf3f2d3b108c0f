"""Checks of the quadratic condition on a pair (alpha, c).

For fixed t the pair must make

    q(x) = A x^2 + B x + C <= 0   for all x >= 0,

with A = -2(1-alpha)^2/(n alpha^2), B = 2K + 4(1-alpha)c/(n alpha^2) - alpha'/alpha
and C = -2c^2/(n alpha^2) - c' + alpha' c/alpha. A downward parabola is
nonpositive on [0, inf) iff (B <= 0 and C <= 0) or B^2 - 4AC <= 0; these are
the two sufficient cases. ``case1_check`` and ``case2_check`` test the same
inequalities in the rearranged (alpha, c) form, independently of the
coefficients, so the two routes can be compared.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List

import numpy as np

from .catalog import Estimate, GeometryParams
from .errors import DomainError
from .timefn import TimeFn, derivative_at

__all__ = [
    "QuadCoeffs",
    "Verdict",
    "ConditionRow",
    "ConditionReport",
    "quad_coeffs",
    "case1_check",
    "case2_check",
    "case1_slack",
    "case2_slack",
    "condition_b_holds",
    "verdict_from_coeffs",
    "grid_oracle",
    "verify_over_interval",
    "verify_at_times",
    "verify_estimate_condition",
]

REL_TOL = 1e-12
GRID_TOL = 1e-9
DEGENERATE_A = 1e-14


class Verdict(str, Enum):
    HOLDS_CASE1 = "holds_case1"
    HOLDS_CASE2 = "holds_case2"
    HOLDS_DEGENERATE = "holds_degenerate"
    FAILS = "fails"

    @property
    def holds(self) -> bool:
        return self is not Verdict.FAILS


@dataclass(frozen=True)
class QuadCoeffs:
    A: float
    B: float
    C: float
    t: float
    # sums of |terms| making up B and C, used to scale roundoff tolerances
    scale_b: float = 0.0
    scale_c: float = 0.0

    def __call__(self, x):
        return (self.A * x + self.B) * x + self.C

    def max_on_halfline(self) -> float:
        """Exact sup of q on x >= 0 (inf when unbounded)."""
        if self.A < 0:
            if self.B <= 0:
                return self.C
            return self.C - self.B**2 / (4 * self.A)
        if self.B > 0 or self.A > 0:
            return math.inf
        return self.C


def _values(alpha: TimeFn, c: TimeFn, t: float, side: int = 0):
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    a = alpha(t)
    cv = c(t)
    if not (a > 0 and cv > 0):
        raise DomainError(f"need alpha(t)>0 and c(t)>0, got {a!r}, {cv!r} at t={t!r}")
    return a, derivative_at(alpha, t, side), cv, derivative_at(c, t, side)


def quad_coeffs(alpha: TimeFn, c: TimeFn, t: float, p: GeometryParams, side: int = 0) -> QuadCoeffs:
    a, da, cv, dc = _values(alpha, c, t, side)
    n, K = p.n, p.K
    A = -2 * (1 - a) ** 2 / (n * a * a)
    b_terms = (2 * K, 4 * (1 - a) * cv / (n * a * a), -da / a)
    c_terms = (-2 * cv * cv / (n * a * a), -dc, da * cv / a)
    return QuadCoeffs(
        A,
        math.fsum(b_terms),
        math.fsum(c_terms),
        t,
        math.fsum(abs(v) for v in b_terms),
        math.fsum(abs(v) for v in c_terms),
    )


def _tol(*terms) -> float:
    return REL_TOL * max(1.0, math.fsum(abs(v) for v in terms))


def case1_slack(alpha: TimeFn, c: TimeFn, t: float, p: GeometryParams, side: int = 0):
    """Slacks (rhs - lhs) of the two first-case inequalities.

    (1-alpha) c <= n alpha (alpha' - 2K alpha)/4  and  (alpha/c)' <= 2/(n alpha).
    """
    a, da, cv, dc = _values(alpha, c, t, side)
    n, K = p.n, p.K
    first = n * a * (da - 2 * K * a) / 4 - (1 - a) * cv
    ratio_d = (da * cv - a * dc) / (cv * cv)
    second = 2 / (n * a) - ratio_d
    return first, second


def case1_check(alpha: TimeFn, c: TimeFn, t: float, p: GeometryParams, side: int = 0) -> bool:
    a, da, cv, dc = _values(alpha, c, t, side)
    n, K = p.n, p.K
    first, second = case1_slack(alpha, c, t, p, side)
    tol1 = _tol(n * a * da / 4, n * K * a * a / 2, (1 - a) * cv)
    tol2 = _tol(2 / (n * a), da / cv, a * dc / (cv * cv))
    return first >= -tol1 and second >= -tol2


def case2_slack(alpha: TimeFn, c: TimeFn, t: float, p: GeometryParams, side: int = 0) -> float:
    """(1-alpha)^2 c' - (1-alpha)(2K - alpha') c - n (2K alpha - alpha')^2/8."""
    a, da, cv, dc = _values(alpha, c, t, side)
    n, K = p.n, p.K
    return (1 - a) ** 2 * dc - (1 - a) * (2 * K - da) * cv - n * (2 * K * a - da) ** 2 / 8


def case2_check(alpha: TimeFn, c: TimeFn, t: float, p: GeometryParams, side: int = 0) -> bool:
    a, da, cv, dc = _values(alpha, c, t, side)
    n, K = p.n, p.K
    slack = case2_slack(alpha, c, t, p, side)
    tol = _tol((1 - a) ** 2 * dc, (1 - a) * 2 * K * cv, (1 - a) * da * cv,
               n * (abs(2 * K * a) + abs(da)) ** 2 / 8)
    return slack >= -tol


def verdict_from_coeffs(q: QuadCoeffs) -> Verdict:
    """Classify by the sign/discriminant dichotomy for a downward parabola."""
    tol_b = REL_TOL * max(1.0, q.scale_b or abs(q.B))
    tol_c = REL_TOL * max(1.0, q.scale_c or abs(q.C))
    if abs(q.A) <= DEGENERATE_A:
        # alpha = 1: q is linear in x
        if q.B <= tol_b and q.C <= tol_c:
            return Verdict.HOLDS_DEGENERATE
        return Verdict.FAILS
    if q.B <= tol_b and q.C <= tol_c:
        return Verdict.HOLDS_CASE1
    sb = max(q.scale_b, abs(q.B))
    sc = max(q.scale_c, abs(q.C))
    tol_disc = REL_TOL * max(1.0, sb * sb + 4 * abs(q.A) * sc)
    if q.B * q.B - 4 * q.A * q.C <= tol_disc:
        return Verdict.HOLDS_CASE2
    return Verdict.FAILS


def condition_b_holds(alpha: TimeFn, c: TimeFn, t: float, p: GeometryParams, side: int = 0) -> Verdict:
    return verdict_from_coeffs(quad_coeffs(alpha, c, t, p, side))


def default_x_max(q: QuadCoeffs) -> float:
    if q.A < -DEGENERATE_A:
        return 2 * (1 + abs(q.B / q.A))
    return 1e3


def grid_oracle(q: QuadCoeffs, x_max: float = None, points: int = 10001) -> float:
    """Brute-force max of q over a uniform grid on [0, x_max]."""
    if x_max is None:
        x_max = default_x_max(q)
    x = np.linspace(0.0, x_max, points)
    return float(np.max((q.A * x + q.B) * x + q.C))


def grid_threshold(q: QuadCoeffs) -> float:
    return GRID_TOL * max(1.0, abs(q.A), abs(q.B), abs(q.C))


def margin(q: QuadCoeffs) -> float:
    """-(sup of q on x >= 0); nonnegative when the condition holds."""
    return -q.max_on_halfline()


@dataclass(frozen=True)
class ConditionRow:
    t: float
    A: float
    B: float
    C: float
    verdict: Verdict
    margin: float
    side: int = 0


@dataclass
class ConditionReport:
    rows: List[ConditionRow]
    kinks: tuple = ()
    errors: List[str] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.errors and all(r.verdict.holds for r in self.rows)

    @property
    def worst_margin(self) -> float:
        return min((r.margin for r in self.rows), default=math.nan)

    def verdicts(self):
        return [r.verdict for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "A", "B", "C", "verdict", "margin"])
        for r in self.rows:
            w.writerow([repr(r.t), repr(r.A), repr(r.B), repr(r.C), r.verdict.value, repr(r.margin)])
        return buf.getvalue()


def sample_times(t_lo: float, t_hi: float, points: int, log: bool = True) -> np.ndarray:
    if not 0 < t_lo < t_hi:
        raise DomainError(f"need 0 < t_lo < t_hi, got {t_lo!r}, {t_hi!r}")
    if points < 2:
        return np.array([t_lo])
    if log:
        ts = np.geomspace(t_lo, t_hi, points)
    else:
        ts = np.linspace(t_lo, t_hi, points)
    ts[0], ts[-1] = t_lo, t_hi
    return ts


def verify_over_interval(alpha: TimeFn, c: TimeFn, p: GeometryParams, t_lo: float, t_hi: float,
                         points: int = 100, log: bool = True) -> ConditionReport:
    """Verdict at sampled times, plus both one-sided checks at declared kinks."""
    return verify_at_times(alpha, c, p, sample_times(t_lo, t_hi, points, log))


def verify_at_times(alpha: TimeFn, c: TimeFn, p: GeometryParams, times) -> ConditionReport:
    """Verdict at the given times; declared kinks inside their span get both one-sided checks."""
    ts = sorted(float(t) for t in times)
    if not ts:
        raise DomainError("no sample times")
    t_lo, t_hi = ts[0], ts[-1]
    kinks = tuple(sorted({k for f in (alpha, c) for k in f.kinks if t_lo <= k <= t_hi}))
    samples = sorted([(t, 0) for t in ts if t not in kinks] + [(k, s) for k in kinks for s in (-1, 1)])
    rows, errors = [], []
    for t, side in samples:
        try:
            q = quad_coeffs(alpha, c, t, p, side)
        except DomainError as exc:
            errors.append(f"t={t!r}: {exc}")
            continue
        rows.append(ConditionRow(t, q.A, q.B, q.C, verdict_from_coeffs(q), margin(q), side))
    return ConditionReport(rows, kinks, errors)


def verify_estimate_condition(e: Estimate, t_lo: float, t_hi: float, points: int = 100,
                              log: bool = True) -> ConditionReport:
    if not e.is_linear:
        raise DomainError(f"{e.id} is nonlinear; the quadratic condition applies to linear estimates")
    return verify_over_interval(e.alpha, e.c, e.params, t_lo, t_hi, points, log)
