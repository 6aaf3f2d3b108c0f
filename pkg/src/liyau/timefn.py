"""Scalar functions of time: evaluation, differentiation, quadrature, ODEs.

A :class:`TimeFn` wraps a callable ``t -> value`` together with an optional
analytic derivative. Everything that needs alpha'(t), c'(t) or a'(t) goes
through :func:`derivative_at`, which falls back to a central difference when
no analytic derivative was supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AccuracyError, BlowUpError, DomainError

__all__ = [
    "TimeFn",
    "constant",
    "piecewise",
    "tabulated",
    "derivative_at",
    "integrate",
    "ode_solve",
]

DEFAULT_QUAD_TOL = 1e-10
DEFAULT_ODE_STEP = 1e-3
_MAX_SIMPSON_DEPTH = 50
_MAX_GEOMETRIC_PIECES = 200


@dataclass(frozen=True)
class TimeFn:
    """A real function of time ``t`` on the interval ``domain``.

    ``domain`` is closed except that a lower end of 0 is open (t > 0).
    ``one_sided`` gives one-sided derivatives at the listed ``kinks``; it is
    called as ``one_sided(t, side)`` with side -1 (left) or +1 (right).
    """

    func: Callable[[float], float]
    deriv: Optional[Callable[[float], float]] = None
    label: str = ""
    domain: tuple = (0.0, math.inf)
    kinks: tuple = ()
    one_sided: Optional[Callable[[float, int], float]] = field(default=None, repr=False)

    def contains(self, t: float) -> bool:
        lo, hi = self.domain
        if not t <= hi:
            return False
        return t > lo or (t == lo and lo > 0)

    def __call__(self, t: float) -> float:
        if not self.contains(t):
            raise DomainError(f"{self.label or 'TimeFn'}: t={t!r} outside domain {self.domain}")
        return self.func(t)


def constant(value: float, label: str = "") -> TimeFn:
    return TimeFn(lambda t: value, lambda t: 0.0, label or f"const {value:g}")


def piecewise(left: TimeFn, right: TimeFn, t0: float, label: str = "") -> TimeFn:
    """``left`` on t <= t0, ``right`` on t > t0, with one-sided derivatives at t0."""

    def func(t):
        return left.func(t) if t <= t0 else right.func(t)

    def deriv(t):
        return derivative_at(left, t) if t <= t0 else derivative_at(right, t)

    def one_sided(t, side):
        piece = left if side < 0 else right
        return derivative_at(piece, t)

    kinks = tuple(k for k in left.kinks if k < t0) + (t0,) + tuple(k for k in right.kinks if k > t0)
    return TimeFn(
        func,
        deriv,
        label or f"{left.label} | {right.label} @ {t0:g}",
        (left.domain[0], right.domain[1]),
        kinks,
        one_sided,
    )


def tabulated(ts: Sequence[float], values: Sequence[float], deriv=None, label: str = "") -> TimeFn:
    """Linear interpolation of a table on strictly increasing ``ts``."""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    if ts.ndim != 1 or ts.shape != values.shape or ts.size < 2:
        raise ValueError("need two equal-length 1-d arrays with at least two nodes")
    if np.any(np.diff(ts) <= 0):
        raise ValueError("table times must be strictly increasing")

    def func(t):
        return float(np.interp(t, ts, values))

    return TimeFn(func, deriv, label, (float(ts[0]), float(ts[-1])))


def _numeric_step(t: float) -> float:
    return max(1e-6, 1e-6 * abs(t))


def derivative_at(f: TimeFn, t: float, side: int = 0) -> float:
    """Derivative of ``f`` at ``t``.

    Uses the analytic derivative when available, otherwise a central
    difference with step ``max(1e-6, 1e-6*t)``. ``side`` selects a one-sided
    derivative at a declared kink.
    """
    if not f.contains(t):
        raise DomainError(f"{f.label or 'TimeFn'}: t={t!r} outside domain {f.domain}")
    if side and f.one_sided is not None and t in f.kinks:
        value = f.one_sided(t, side)
    elif f.deriv is not None:
        value = f.deriv(t)
    else:
        h = _numeric_step(t)
        if side < 0:
            value = (3 * f(t) - 4 * f(t - h) + f(t - 2 * h)) / (2 * h)
        elif side > 0:
            value = (-3 * f(t) + 4 * f(t + h) - f(t + 2 * h)) / (2 * h)
        else:
            if not (f.contains(t - h) and f.contains(t + h)):
                raise DomainError(f"t={t!r} is not interior to {f.domain} for step {h:g}")
            value = (f(t + h) - f(t - h)) / (2 * h)
    if not math.isfinite(value):
        raise DomainError(f"non-finite derivative of {f.label or 'TimeFn'} at t={t!r}")
    return float(value)


def _call(f, x):
    if isinstance(f, TimeFn):
        return f.func(x)
    return f(x)


def _finite_at(f, x) -> bool:
    try:
        return math.isfinite(_call(f, x))
    except (ZeroDivisionError, OverflowError, ValueError):
        return False


def _adaptive_simpson(f, a, b, tol, rtol):
    fa, fm, fb = _call(f, a), _call(f, 0.5 * (a + b)), _call(f, b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6
    total = 0.0
    converged = True
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = _call(f, lm), _call(f, rm)
        left = (m - a) * (fa + 4 * flm + fm) / 6
        right = (b - m) * (fm + 4 * frm + fb) / 6
        delta = left + right - whole
        if abs(delta) <= 15 * max(eps, rtol * abs(left + right)) or depth >= _MAX_SIMPSON_DEPTH:
            if depth >= _MAX_SIMPSON_DEPTH and abs(delta) > 15 * max(eps, rtol * abs(left + right)):
                converged = False
            total += left + right + delta / 15
        else:
            stack.append((m, b, fm, frm, fb, right, eps / 2, depth + 1))
            stack.append((a, m, fa, flm, fm, left, eps / 2, depth + 1))
    if not math.isfinite(total):
        converged = False
    return total, converged


def _geometric_from_lo(f, lo, hi, tol, rtol):
    # pieces [lo + w/2^(k+1), lo + w/2^k]; geometric tail extrapolated from the last two
    width = hi - lo
    piece_tol = tol / (2 * _MAX_GEOMETRIC_PIECES)
    total = 0.0
    prev = None
    for k in range(_MAX_GEOMETRIC_PIECES):
        a = lo + width / 2 ** (k + 1)
        b = lo + width / 2**k
        piece, ok = _adaptive_simpson(f, a, b, piece_tol, rtol)
        if not ok:
            raise AccuracyError(f"quadrature failed on [{a:g}, {b:g}]", total)
        total += piece
        if prev is not None and prev != 0.0:
            ratio = piece / prev
            if 0 <= ratio < 1:
                tail = piece * ratio / (1 - ratio)
                if abs(tail) <= max(tol / 2, rtol * abs(total)):
                    return total + tail
        elif prev == 0.0 and piece == 0.0:
            return total
        prev = piece
    raise AccuracyError(
        f"integral over [{lo:g}, {hi:g}] did not converge toward the singular end", total
    )


def integrate(f, lo: float, hi: float, tol: float = DEFAULT_QUAD_TOL, rtol: float = 0.0) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[lo, hi]``.

    The error target is ``max(tol, rtol*|value|)``. If ``f`` is not finite at
    ``lo`` the interval is split geometrically toward ``lo`` so that
    integrable endpoint singularities are never evaluated.

    Raises :class:`AccuracyError` (carrying the best estimate) when the
    target cannot be met.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo!r}, {hi!r}]")
    if _finite_at(f, lo):
        value, ok = _adaptive_simpson(f, lo, hi, tol, rtol)
        if not ok:
            raise AccuracyError(f"adaptive Simpson did not converge on [{lo:g}, {hi:g}]", value)
        return value
    return _geometric_from_lo(f, lo, hi, tol, rtol)


def ode_solve(rhs, t0: float, c0: float, T: float, step: float = DEFAULT_ODE_STEP, label: str = "") -> TimeFn:
    """Integrate ``c' = rhs(t, c)`` from ``(t0, c0)`` to ``T`` with classical RK4.

    The grid is uniform with spacing at most ``step``; values between nodes
    are interpolated linearly. The returned TimeFn's derivative is the
    vector field evaluated along the interpolated trajectory.
    """
    if not t0 < T:
        raise DomainError(f"need t0 < T, got {t0!r}, {T!r}")
    n = max(1, math.ceil((T - t0) / step - 1e-9))
    h = (T - t0) / n
    ts = t0 + h * np.arange(n + 1)
    ts[-1] = T
    cs = np.empty(n + 1)
    cs[0] = c = float(c0)
    t = t0
    for i in range(n):
        try:
            k1 = rhs(t, c)
            k2 = rhs(t + h / 2, c + h * k1 / 2)
            k3 = rhs(t + h / 2, c + h * k2 / 2)
            k4 = rhs(t + h, c + h * k3)
        except (ZeroDivisionError, OverflowError) as exc:
            raise BlowUpError(f"rhs failed after t={t:g}: {exc}", t) from exc
        c_next = c + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if not all(math.isfinite(v) for v in (k1, k2, k3, k4, c_next)):
            raise BlowUpError(f"non-finite rhs after t={t:g}", t)
        c = c_next
        t = float(ts[i + 1])
        cs[i + 1] = c

    def func(s):
        return float(np.interp(s, ts, cs))

    def deriv(s):
        return float(rhs(s, func(s)))

    return TimeFn(func, deriv, label or "ode solution", (float(t0), float(T)))

