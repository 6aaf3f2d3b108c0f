"""Construction of (alpha, c) pairs.

Three routes:

* :func:`pair_from_profile` - integral formulas driven by a profile a(t),
* :func:`envelope_ode` - the smallest c for a given alpha, obtained by
  integrating the second-case inequality as an equality,
* :func:`splice` - join a first-case pair on (0, t0] to a second-case
  pair on (t0, T].
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .catalog import (
    GeometryParams,
    _li_xu_linear_pair,
    _li_xu_sinh_pair,
    _new_max_pair,
    _sinh_cosh_minus_x,
)
from .errors import (
    AccuracyError,
    ConstructionError,
    DomainError,
    InputError,
    ProfileError,
    SingularityError,
    SpliceError,
)
from .timefn import DEFAULT_ODE_STEP, TimeFn, derivative_at, integrate, ode_solve, piecewise

__all__ = [
    "Profile",
    "quadratic_profile",
    "sinh_profile",
    "profile_from_csv",
    "builtin_profile",
    "check_profile",
    "pair_from_profile",
    "envelope_ode",
    "splice",
    "SpliceReport",
    "closed_form_special",
    "corollary_max_pair",
    "spliced_pair",
    "default_grid",
]

T_MIN = 1e-8
QUAD_RTOL = 1e-13
SPLICE_JUMP_TOL = 1e-10
C1_GAP_TOL = 1e-6


@dataclass(frozen=True)
class Profile:
    """Generating function a(t) > 0.

    ``head`` optionally returns the exact pair
    ``(int_0^s a, int_0^s a'^2/a)`` for small ``s``; without it the integrals
    near 0 are done numerically.
    """

    a: TimeFn
    head: Optional[Callable[[float], Tuple[float, float]]] = None
    label: str = ""
    tabulated: bool = False
    nodes: tuple = ()

    def da(self, t: float) -> float:
        return derivative_at(self.a, t)

    def energy(self, t: float) -> float:
        """a'(t)^2 / a(t)."""
        d = self.da(t)
        return d * d / self.a(t)


def quadratic_profile() -> Profile:
    a = TimeFn(lambda t: t * t, lambda t: 2 * t, "t^2")
    return Profile(a, lambda s: (s**3 / 3, 4 * s), "t^2")


def sinh_profile(K: float) -> Profile:
    if not K > 0:
        raise ConstructionError(f"sinh profile needs K>0, got K={K!r}")
    a = TimeFn(lambda t: math.sinh(K * t) ** 2, lambda t: K * math.sinh(2 * K * t), f"sinh^2({K:g}t)")

    def head(s):
        x = K * s
        ia = _sinh_cosh_minus_x(x) / (2 * K)
        ie = 2 * K * K * s + K * math.sinh(2 * x)
        return ia, ie

    return Profile(a, head, a.label)


def profile_from_csv(path) -> Profile:
    """Two-column (t, a) table with strictly increasing t, no header required."""
    ts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not ts:
                    continue  # header
                raise InputError(f"{path}: bad row {row!r}")
            ts.append(t)
            vals.append(v)
    ts = np.asarray(ts)
    vals = np.asarray(vals)
    if ts.size < 4:
        raise InputError(f"{path}: need at least 4 rows, got {ts.size}")
    if np.any(np.diff(ts) <= 0) or ts[0] <= 0:
        raise InputError(f"{path}: t must be positive and strictly increasing")
    if np.any(vals <= 0):
        raise ProfileError(f"{path}: a(t) must be positive", "(A1)")
    spline = CubicSpline(ts, vals)
    dspline = spline.derivative()
    a = TimeFn(lambda t: float(spline(t)), lambda t: float(dspline(t)), Path(path).name,
               (float(ts[0]), float(ts[-1])))

    # power-law fit a ~ C t^p through the first two rows for the piece [0, t0]
    p_exp = math.log(vals[1] / vals[0]) / math.log(ts[1] / ts[0])
    t0, a0 = float(ts[0]), float(vals[0])

    def head(s):
        if p_exp <= 1:
            raise ProfileError(
                f"{path}: a'^2/a ~ t^{p_exp - 2:.3g} near 0 is not integrable", "(A2)"
            )
        return a0 * t0 / (p_exp + 1), p_exp**2 * a0 / (t0 * (p_exp - 1))

    return Profile(a, head, Path(path).name, tabulated=True, nodes=tuple(float(v) for v in ts))


def builtin_profile(name: str, K: float) -> Profile:
    if name in ("quadratic", "quadratic_profile", "t2"):
        return quadratic_profile()
    if name in ("sinh", "sinh_profile"):
        return sinh_profile(K)
    raise ConstructionError(f"unknown profile {name!r}; use quadratic, sinh or a CSV path")


def check_profile(prof: Profile, horizon: float = 10.0) -> None:
    """Numerical admission test for (A1) and (A2); raises :class:`ProfileError`."""
    a = prof.a
    if prof.tabulated:
        # limits are untestable on a table; use its two smallest points
        small, large = prof.nodes[0], prof.nodes[1]
    else:
        small, large = 1e-6, 1e-4
    try:
        a_s, a_l = a(small), a(large)
        r_s, r_l = a_s / derivative_at(a, small), a_l / derivative_at(a, large)
    except (DomainError, ZeroDivisionError) as exc:
        raise ProfileError(f"{prof.label}: cannot evaluate near 0 ({exc})", "(A1)") from exc
    if not (0 < a_s < a_l < 1e-2):
        raise ProfileError(f"{prof.label}: a(t) does not decrease to 0 near t=0", "(A1)")
    if not (0 < r_s < r_l < 1e-2):
        raise ProfileError(f"{prof.label}: a/a' does not tend to 0 at t=0", "(A1)")
    try:
        if prof.tabulated:
            prof.head(a.domain[0])
            integrate(prof.energy, a.domain[0], min(horizon, a.domain[1]), tol=1e-10, rtol=1e-10)
        else:
            integrate(prof.energy, 0.0, horizon, tol=1e-10, rtol=1e-10)
    except AccuracyError as exc:
        raise ProfileError(f"{prof.label}: int_0^L a'^2/a diverges ({exc})", "(A2)") from exc


def default_grid(t_lo: float = 1e-3, t_hi: float = 10.0, per_decade: int = 1000) -> np.ndarray:
    decades = math.log10(t_hi / t_lo)
    return np.geomspace(t_lo, t_hi, max(2, int(round(decades * per_decade)) + 1))


def _cumulative(f, grid, start_value, t_start):
    out = np.empty(len(grid))
    acc = start_value
    if grid[0] > t_start:
        acc += integrate(f, t_start, grid[0], tol=0.0, rtol=QUAD_RTOL)
    out[0] = acc
    for i in range(1, len(grid)):
        acc += integrate(f, grid[i - 1], grid[i], tol=0.0, rtol=QUAD_RTOL)
        out[i] = acc
    return out


def pair_from_profile(prof: Profile, p: GeometryParams, t_grid=None, check: bool = True):
    """(alpha, c) built from a profile by the integral formulas

    alpha = 1 + (2K/a) int_0^t a,
    c = nK/2 + (nK^2/2a) int_0^t a + (n/8a) int_0^t a'^2/a.

    The two running integrals are tabulated on ``t_grid``; between nodes they
    are completed by quadrature from the node below.
    """
    if p.K < 0:
        raise ConstructionError(f"profile construction needs K>=0, got K={p.K!r}")
    grid = np.asarray(default_grid() if t_grid is None else t_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise DomainError("t_grid must be positive and strictly increasing")
    if check:
        check_profile(prof, float(grid[-1]))

    if prof.tabulated:
        t_start = prof.a.domain[0]
        if grid[0] < t_start:
            raise DomainError(f"t_grid starts before the profile table ({t_start:g})")
    else:
        t_start = min(T_MIN, float(grid[0]))
    if prof.head is not None:
        ia0, ie0 = prof.head(t_start)
    else:
        ia0 = integrate(prof.a.func, 0.0, t_start, tol=0.0, rtol=QUAD_RTOL)
        ie0 = integrate(prof.energy, 0.0, t_start, tol=0.0, rtol=QUAD_RTOL)

    I = _cumulative(prof.a.func, grid, ia0, t_start)
    J = _cumulative(prof.energy, grid, ie0, t_start)
    nodes = grid.tolist()
    domain = (nodes[0], nodes[-1])
    n, K = p.n, p.K

    def running(table, f, t):
        # exact table value at a node, short quadrature from the node below otherwise
        i = bisect.bisect_right(nodes, t) - 1
        if i < 0 or t > nodes[-1]:
            raise DomainError(f"t={t!r} outside tabulated range {domain}")
        if t == nodes[i]:
            return float(table[i])
        return float(table[i]) + integrate(f, nodes[i], t, tol=0.0, rtol=QUAD_RTOL)

    def parts(t):
        a = prof.a(t)
        return running(I, prof.a.func, t), running(J, prof.energy, t), a, prof.da(t)

    def alpha_f(t):
        i, _, a, _ = parts(t)
        return 1 + 2 * K * i / a

    def alpha_d(t):
        i, _, a, da = parts(t)
        return 2 * K * (1 - i * da / (a * a))

    def c_f(t):
        i, j, a, _ = parts(t)
        return n * K / 2 + n * K * K * i / (2 * a) + n * j / (8 * a)

    def c_d(t):
        i, j, a, da = parts(t)
        return n * K * K / 2 * (1 - i * da / (a * a)) + n / 8 * (da * da / (a * a) - j * da / (a * a))

    alpha = TimeFn(alpha_f, alpha_d, f"alpha[{prof.label}]", domain)
    c = TimeFn(c_f, c_d, f"c[{prof.label}]", domain)
    return alpha, c


def envelope_ode(alpha: TimeFn, p: GeometryParams, t0: float, c0: float, T: float,
                 step: float = DEFAULT_ODE_STEP) -> TimeFn:
    """Solve (1-a)^2 c' = (1-a)(2K - a')c + n(2Ka - a')^2/8 forward from c(t0) = c0."""
    if not c0 > 0:
        raise DomainError(f"c0 must be positive, got {c0!r}")
    n, K = p.n, p.K
    # locate alpha(t) = 1 on the step grid before integrating
    probe = np.linspace(t0, T, max(2, int(math.ceil((T - t0) / step)) + 1))
    gap = np.array([1 - alpha(t) for t in probe])
    hit = np.nonzero(gap == 0)[0]
    flips = np.nonzero(np.sign(gap[:-1]) * np.sign(gap[1:]) < 0)[0]
    if hit.size or flips.size:
        if hit.size and (not flips.size or hit[0] <= flips[0]):
            where = float(probe[hit[0]])
        else:
            i = flips[0]
            lo, hi = probe[i], probe[i + 1]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if (1 - alpha(mid)) * gap[i] > 0:
                    lo = mid
                else:
                    hi = mid
            where = 0.5 * (lo + hi)
        raise SingularityError(f"alpha(t) = 1 at t={where:.12g}; the envelope ODE is singular", where)

    def rhs(t, c):
        a = alpha(t)
        da = derivative_at(alpha, t)
        return ((1 - a) * (2 * K - da) * c + n * (2 * K * a - da) ** 2 / 8) / (1 - a) ** 2

    return ode_solve(rhs, t0, c0, T, step, label="envelope c(t)")


@dataclass(frozen=True)
class SpliceReport:
    t0: float
    alpha_jump: float
    c_jump: float
    left_derivative: float
    right_derivative: float

    @property
    def derivative_gap(self) -> float:
        return abs(self.right_derivative - self.left_derivative)

    @property
    def c1(self) -> bool:
        return self.derivative_gap <= C1_GAP_TOL


def splice(first, second, t0: float, tol: float = SPLICE_JUMP_TOL):
    """Join ``first = (alpha, c)`` on (0, t0] with ``second`` on (t0, T].

    Returns ``(alpha, c, report)``; raises :class:`SpliceError` if alpha or c
    jumps at t0 by more than ``tol``.
    """
    a1, c1 = first
    a2, c2 = second
    da = abs(a1(t0) - a2(t0))
    dc = abs(c1(t0) - c2(t0))
    if da > tol:
        raise SpliceError(f"alpha jumps by {da:.3g} at t0={t0:g}", da)
    if dc > tol:
        raise SpliceError(f"c jumps by {dc:.3g} at t0={t0:g}", dc)
    report = SpliceReport(t0, da, dc, derivative_at(c1, t0), derivative_at(c2, t0))
    return piecewise(a1, a2, t0, "alpha spliced"), piecewise(c1, c2, t0, "c spliced"), report


def closed_form_special(name: str, p: GeometryParams):
    """Analytic pairs of the t^2 and sinh^2(Kt) profiles."""
    if name in ("quadratic_profile", "quadratic"):
        if p.K < 0:
            raise ConstructionError(f"quadratic_profile needs K>=0, got {p.K!r}")
        return _li_xu_linear_pair(p)
    if name in ("sinh_profile", "sinh"):
        if not p.K > 0:
            raise ConstructionError(f"sinh_profile needs K>0, got {p.K!r}")
        return _li_xu_sinh_pair(p)
    raise ConstructionError(f"unknown special pair {name!r}")


def corollary_max_pair(alpha: float, p: GeometryParams):
    """alpha constant, c = n alpha^2/2 max{1/t, K/(alpha-1)}."""
    if not (alpha > 1 and p.K >= 0):
        raise ConstructionError("need alpha > 1 and K >= 0")
    return _new_max_pair(alpha, p)


def spliced_pair(alpha: float, p: GeometryParams, T: float, step: float = DEFAULT_ODE_STEP):
    """n alpha^2/2t up to t0 = (alpha-1)/K, then the numerical envelope up to T.

    Returns ``(alpha, c, report)`` as :func:`splice`.
    """
    if not (alpha > 1 and p.K > 0):
        raise ConstructionError("need alpha > 1 and K > 0")
    t0 = (alpha - 1) / p.K
    if not T > t0:
        raise DomainError(f"T={T!r} must exceed t0={t0!r}")
    n = p.n
    a_fn = TimeFn(lambda t: alpha, lambda t: 0.0, f"const {alpha:g}")
    first_c = TimeFn(lambda t: n * alpha**2 / (2 * t), lambda t: -n * alpha**2 / (2 * t * t), "n a^2/2t",
                     (0.0, t0))
    env = envelope_ode(a_fn, p, t0, first_c(t0), T, step)
    second_a = TimeFn(a_fn.func, a_fn.deriv, a_fn.label, env.domain)
    first_a = TimeFn(a_fn.func, a_fn.deriv, a_fn.label, (0.0, t0))
    return splice((first_a, first_c), (second_a, env), t0)
