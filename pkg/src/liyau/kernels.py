"""Closed-form heat kernels, a periodic Crank-Nicolson solver, and slack checks.

Model spaces and their curvature constants (Ricci >= -K):

=============  ===  ===  =====================================
id              K    n   spatial coordinate
=============  ===  ===  =====================================
gaussian_rn     0   any  radius r >= 0
hyperbolic_h3   2    3   geodesic radius r >= 0 (curvature -1)
sphere_s3      -2    3   polar angle theta in [0, pi] (unit S^3)
circle_flat     0    1   arclength x (period 2 pi)
=============  ===  ===  =====================================
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .catalog import Estimate, GeometryParams, SolutionState, residual
from .errors import ConfigError, DomainError, InputError

__all__ = [
    "Kernel",
    "KERNEL_IDS",
    "make_kernel",
    "evaluate",
    "SlackRow",
    "SlackReport",
    "verify_estimate",
    "harnack_check",
    "FDRun",
    "fd_solve",
    "fd_check",
    "default_k_max",
]

KERNEL_IDS = ("gaussian_rn", "hyperbolic_h3", "sphere_s3", "circle_flat")
FD_ALLOWANCE_256 = 0.05
_TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class Kernel:
    id: str
    params: GeometryParams
    k_max: Optional[int] = None  # image-sum truncation; None picks one from t


def make_kernel(kid: str, n: float = 3, k_max: Optional[int] = None) -> Kernel:
    """Kernel ``kid``; ``n`` only matters for gaussian_rn."""
    if kid == "gaussian_rn":
        return Kernel(kid, GeometryParams(0.0, n), k_max)
    if kid == "hyperbolic_h3":
        return Kernel(kid, GeometryParams(2.0, 3), k_max)
    if kid == "sphere_s3":
        return Kernel(kid, GeometryParams(-2.0, 3), k_max)
    if kid == "circle_flat":
        return Kernel(kid, GeometryParams(0.0, 1), k_max)
    raise ConfigError(f"unknown kernel {kid!r}; known: {', '.join(KERNEL_IDS)}")


def default_k_max(t: float) -> int:
    """Image count whose tail is below ~1e-16 of the kernel value.

    The S^3 sum cancels down to about e^{-3t} of its largest term, so the
    budget grows with t.
    """
    return max(5, math.ceil((math.sqrt(4 * t * (40 + 3 * t)) + math.pi) / _TWO_PI))


def _images(theta: float, t: float, k_max: int):
    k = np.arange(-k_max, k_max + 1)
    phi = theta + _TWO_PI * k
    e = -phi * phi / (4 * t)
    m = e.max()
    return phi, np.exp(e - m), m


def _gaussian(n, r, t):
    log_u = -(n / 2) * math.log(4 * math.pi * t) - r * r / (4 * t)
    dr = -r / (2 * t)
    h = -n / (2 * t) + r * r / (4 * t * t)
    return dr * dr, h, log_u


def _inv_minus_coth(r: float) -> float:
    """1/r - coth(r)."""
    if r < 1e-2:
        r2 = r * r
        return -r * (1 / 3 - r2 / 45 + 2 * r2 * r2 / 945)
    return 1 / r - 1 / math.tanh(r)


def _log_r_over_sinh(r: float) -> float:
    if r < 1e-2:
        r2 = r * r
        return -(r2 / 6 - r2 * r2 / 180 + r2**3 / 2835)
    return math.log(r) - (r + math.log1p(-math.exp(-2 * r)) - math.log(2))


def _hyperbolic(r, t):
    log_u = -1.5 * math.log(4 * math.pi * t) + _log_r_over_sinh(r) - t - r * r / (4 * t)
    dr = _inv_minus_coth(r) - r / (2 * t)
    h = -1.5 / t - 1 + r * r / (4 * t * t)
    return dr * dr, h, log_u


def _sphere(theta, t, k_max):
    s = math.sin(theta)
    if abs(s) < 1e-8:
        # poles of the polar coordinate: S and sin both vanish, take the derivative ratio
        pole = 0.0 if theta < 1 else math.pi
        phi, w, m = _images(pole, t, k_max)
        p2 = phi * phi
        ds = np.sum((1 - p2 / (2 * t)) * w)
        dst = np.sum((3 * p2 / (4 * t * t) - p2 * p2 / (8 * t**3)) * w)
        log_u = t - 1.5 * math.log(4 * math.pi * t) + m + math.log(abs(ds))
        return 0.0, 1 - 1.5 / t + dst / ds, log_u
    phi, w, m = _images(theta, t, k_max)
    p2 = phi * phi
    S = np.sum(phi * w)
    S_theta = np.sum((1 - p2 / (2 * t)) * w)
    S_t = np.sum(phi * p2 / (4 * t * t) * w)
    log_u = t - 1.5 * math.log(4 * math.pi * t) + m + math.log(S / s)
    dtheta = -math.cos(theta) / s + S_theta / S
    h = 1 - 1.5 / t + S_t / S
    return dtheta * dtheta, h, log_u


def _circle(x, t, k_max):
    phi, w, m = _images(x, t, k_max)
    W = np.sum(w)
    dx = np.sum(-phi / (2 * t) * w) / W
    h = -0.5 / t + np.sum(phi * phi * w) / (4 * t * t * W)
    log_u = -0.5 * math.log(4 * math.pi * t) + m + math.log(W)
    return dx * dx, h, log_u


def evaluate(k: Kernel, r: float, t: float) -> SolutionState:
    """(g, h, log u) of the kernel at distance ``r`` from its pole at time ``t``."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    k_max = k.k_max if k.k_max is not None else default_k_max(t)
    if k.id == "gaussian_rn":
        if r < 0:
            raise DomainError(f"radius must be >= 0, got {r!r}")
        g, h, log_u = _gaussian(k.params.n, r, t)
    elif k.id == "hyperbolic_h3":
        if r < 0:
            raise DomainError(f"radius must be >= 0, got {r!r}")
        g, h, log_u = _hyperbolic(r, t)
    elif k.id == "sphere_s3":
        if not 0 <= r < math.pi:
            raise DomainError(f"sphere angle must lie in [0, pi), got {r!r}")
        g, h, log_u = _sphere(r, t, k_max)
    elif k.id == "circle_flat":
        g, h, log_u = _circle(r, t, k_max)
    else:
        raise ConfigError(f"unknown kernel {k.id!r}")
    return SolutionState(float(g), float(h), t, float(log_u))


@dataclass(frozen=True)
class SlackRow:
    kernel: str
    estimate: str
    r: float
    t: float
    g: float
    h: float
    slack: float


@dataclass
class SlackReport:
    rows: List[SlackRow]
    allowance: float = 0.0

    @property
    def min_slack(self) -> float:
        return min((row.slack for row in self.rows), default=math.nan)

    @property
    def argmin(self):
        row = min(self.rows, key=lambda row: row.slack)
        return row.r, row.t

    def passed(self, tol: float = 1e-8) -> bool:
        return self.min_slack >= -max(tol, self.allowance)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kernel", "estimate", "r", "t", "g", "h", "slack"])
        for row in self.rows:
            w.writerow([row.kernel, row.estimate, repr(row.r), repr(row.t), repr(row.g),
                        repr(row.h), repr(row.slack)])
        return buf.getvalue()


def _same_geometry(a: GeometryParams, b: GeometryParams) -> bool:
    return math.isclose(a.K, b.K, rel_tol=0, abs_tol=1e-12) and math.isclose(a.n, b.n, abs_tol=1e-12)


def verify_estimate(k: Kernel, e: Estimate, r_grid: Sequence[float], t_grid: Sequence[float]) -> SlackReport:
    """slack = -residual at every (r, t) of the grids (t-major order)."""
    if not _same_geometry(k.params, e.params):
        raise ConfigError(
            f"{e.id} is built for (K={e.params.K:g}, n={e.params.n:g}) but {k.id} has "
            f"(K={k.params.K:g}, n={k.params.n:g})"
        )
    rows = []
    label = e.label()
    for t in t_grid:
        for r in r_grid:
            s = evaluate(k, float(r), float(t))
            rows.append(SlackRow(k.id, label, float(r), float(t), s.g, s.h, -residual(e, s)))
    return SlackReport(rows)


def harnack_check(k: Kernel, theta: float, s: float, t: float, r_x: float, r_y: float, d: float) -> float:
    """RHS/LHS of the Harnack inequality implied by the exponential-alpha bound.

    u(s,x) <= ((1-e^{2θKt})/(1-e^{2θKs}))^{n/2}
              * exp(-(θK/2) d^2/(e^{-2θKt} - e^{-2θKs})) * u(t,y).
    A ratio >= 1 means the inequality holds.
    """
    K, n = k.params.K, k.params.n
    if not K < 0:
        raise ConfigError(f"the Harnack check needs K<0 (positive curvature); {k.id} has K={K:g}")
    if not 0 < theta <= 1 / 3 + 1e-15:
        raise DomainError(f"θ must lie in (0, 1/3], got {theta!r}")
    if not s > 0:
        raise DomainError(f"s must be positive (the prefactor is singular at s=0), got {s!r}")
    if not s <= t:
        raise DomainError(f"need s <= t, got s={s!r}, t={t!r}")
    if d < 0:
        raise DomainError(f"distance must be >= 0, got {d!r}")
    log_pref = (n / 2) * math.log(math.expm1(2 * theta * K * t) / math.expm1(2 * theta * K * s))
    if d == 0:
        log_gauss = 0.0
    elif s == t:
        return math.inf
    else:
        denom = math.exp(-2 * theta * K * s) * math.expm1(-2 * theta * K * (t - s))
        log_gauss = -(theta * K / 2) * d * d / denom
    log_rhs = log_pref + log_gauss + evaluate(k, r_y, t).log_u
    return math.exp(log_rhs - evaluate(k, r_x, s).log_u)


# ---------------------------------------------------------------------------
# finite differences on the circle


@dataclass
class FDRun:
    x: np.ndarray
    times: np.ndarray
    u: np.ndarray  # shape (len(times), N)
    dt: float
    eps: float = 0.0
    masses: np.ndarray = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.x.size

    @property
    def dx(self) -> float:
        return _TWO_PI / self.N

    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.masses - self.masses[0])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        for t, row in zip(self.times, self.u):
            for x, v in zip(self.x, row):
                w.writerow([repr(float(t)), repr(float(x)), repr(float(v))])
        return buf.getvalue()


def fd_solve(initial, N: int, T: float, eps: float = 0.0) -> FDRun:
    """Crank-Nicolson for u_t = u_xx on the circle [0, 2 pi), time step ~ dx.

    ``initial`` is either a callable of x or N samples. The circulant system
    is solved in Fourier space. Raises :class:`InputError` for nonpositive
    data and :class:`DomainError` if the solution drops to ``eps``.
    """
    if N < 64:
        raise InputError(f"N must be >= 64, got {N}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T!r}")
    dx = _TWO_PI / N
    x = dx * np.arange(N)
    u0 = np.asarray(initial(x) if callable(initial) else initial, dtype=float)
    if u0.shape != (N,):
        raise InputError(f"initial data must have {N} samples, got shape {u0.shape}")
    if not np.all(u0 > eps):
        raise InputError("initial data must be strictly positive (above the floor eps)")
    steps = max(1, math.ceil(T / dx - 1e-9))
    dt = T / steps
    freq = np.fft.rfftfreq(N, d=1.0 / N)
    lam = -(4 / dx**2) * np.sin(np.pi * freq / N) ** 2
    amp = (1 + dt * lam / 2) / (1 - dt * lam / 2)
    snaps = np.empty((steps + 1, N))
    snaps[0] = u0
    spec = np.fft.rfft(u0)
    for i in range(1, steps + 1):
        spec = spec * amp
        snaps[i] = np.fft.irfft(spec, n=N)
        if not np.all(snaps[i] > eps):
            raise DomainError(f"positivity lost at step {i} (t={i * dt:g})")
    times = dt * np.arange(steps + 1)
    times[-1] = T
    masses = snaps.sum(axis=1) * dx
    return FDRun(x, times, snaps, dt, eps, masses)


def fd_derivatives(run: FDRun, i: int):
    """(g, h) at all nodes of snapshot ``i`` from central differences of log u."""
    L = np.log(run.u[i])
    dx = run.dx
    Lp, Lm = np.roll(L, -1), np.roll(L, 1)
    g = ((Lp - Lm) / (2 * dx)) ** 2
    h = (Lp - 2 * L + Lm) / dx**2 + g
    return g, h


def fd_check(run: FDRun, e: Estimate, t_min: float, t_max: float = math.inf,
             allowance: Optional[float] = None) -> SlackReport:
    """Slack of ``e`` on the snapshots with t_min <= t <= t_max."""
    if not _same_geometry(e.params, GeometryParams(0.0, 1)):
        raise ConfigError(f"{e.id}: the circle solver needs K=0, n=1")
    if not t_min > 0:
        raise DomainError(f"t_min must be positive, got {t_min!r}")
    if allowance is None:
        allowance = FD_ALLOWANCE_256 * 256 / run.N
    rows = []
    label = e.label()
    for i, t in enumerate(run.times):
        if not t_min <= t <= t_max:
            continue
        g, h = fd_derivatives(run, i)
        for xv, gv, hv in zip(run.x, g, h):
            s = SolutionState(float(gv), float(hv), float(t))
            rows.append(SlackRow("fd_circle", label, float(xv), float(t), s.g, s.h, -residual(e, s)))
    return SlackReport(rows, allowance)
