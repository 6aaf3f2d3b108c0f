"""Registry of Li-Yau-type gradient estimates.

Every estimate bounds ``g = |grad u|^2/u^2`` for a positive heat-equation
solution ``u`` in terms of ``h = u_t/u`` and ``t``. Linear estimates have
the shape ``g - alpha(t)*h - c(t) <= 0``; ``bakry_qian`` and ``bbg`` are
nonlinear in ``(g, h)``.

Sign convention: the Ricci lower bound is ``-K``, so ``K > 0`` allows
negative curvature and ``K < 0`` forces positive curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional

from .errors import ConstructionError, DomainError
from .timefn import TimeFn, constant, derivative_at, piecewise

__all__ = [
    "GeometryParams",
    "SolutionState",
    "Estimate",
    "Ceiling",
    "CatalogEntry",
    "ESTIMATE_IDS",
    "LINEAR_IDS",
    "make_estimate",
    "residual",
    "max_allowed_gradient",
    "list_catalog",
    "bbg_phi",
    "bbg_h_lower_limit",
]


@dataclass(frozen=True)
class GeometryParams:
    """Ricci lower bound ``-K`` and dimension ``n``."""

    K: float
    n: float

    def __post_init__(self):
        if not math.isfinite(self.K):
            raise ConstructionError(f"K must be finite, got {self.K!r}")
        if not (math.isfinite(self.n) and self.n >= 1):
            raise ConstructionError(f"dimension n must be >= 1, got {self.n!r}")


@dataclass(frozen=True)
class SolutionState:
    """Pointwise data of a positive solution: g = |grad log u|^2, h = (log u)_t."""

    g: float
    h: float
    t: float
    log_u: float = math.nan

    def __post_init__(self):
        if self.g < 0:
            raise DomainError(f"g must be nonnegative, got {self.g!r}")
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t!r}")


@dataclass(frozen=True)
class Estimate:
    id: str
    params: GeometryParams
    kind: str  # "linear", "bakry_qian" or "bbg"
    alpha: Optional[TimeFn] = None
    c: Optional[TimeFn] = None
    extra: Mapping[str, float] = field(default_factory=dict)
    validity: str = ""

    @property
    def is_linear(self) -> bool:
        return self.kind == "linear"

    def label(self) -> str:
        if not self.extra:
            return self.id
        args = ",".join(f"{k}={v:g}" for k, v in sorted(self.extra.items()))
        return f"{self.id}({args})"


class Ceiling(NamedTuple):
    """Largest admissible g; ``feasible`` is False when it had to be floored at 0."""

    value: float
    feasible: bool


class CatalogEntry(NamedTuple):
    id: str
    required: tuple
    validity: str

    def __str__(self):
        return f"{self.id}: {self.validity}"


# ---------------------------------------------------------------------------
# numerically careful helpers


def _sinh_cosh_minus_x(x: float) -> float:
    """sinh(x)cosh(x) - x without cancellation for small x."""
    if abs(x) >= 0.5:
        return 0.5 * (math.sinh(2 * x) - 2 * x)
    y = 2 * x
    term = y**3 / 6
    total = 0.0
    k = 1
    while abs(term) > 1e-18 * abs(total) or total == 0.0:
        total += term
        term *= y * y / ((2 * k + 2) * (2 * k + 3))
        k += 1
        if k > 30:
            break
    return 0.5 * total


def _x_over_expm1(y: float) -> float:
    """y / (e^y - 1), with the series branch near 0."""
    if abs(y) < 1e-8:
        return 1.0 / (1.0 + 0.5 * y)
    return y / math.expm1(y)


def _coth(x: float) -> float:
    return 1.0 / math.tanh(x)


# ---------------------------------------------------------------------------
# linear estimate families


def _li_yau_pair(alpha: float, p: GeometryParams, divisor: float):
    n, K = p.n, p.K
    shift = n * alpha**2 * K / (divisor * (alpha - 1)) if (K != 0 and alpha != 1) else 0.0
    c = TimeFn(
        lambda t: n * alpha**2 / (2 * t) + shift,
        lambda t: -n * alpha**2 / (2 * t * t),
        f"c(t)=n a^2/2t + {shift:g}",
    )
    return constant(alpha), c


def _hamilton_pair(p: GeometryParams):
    n, K = p.n, p.K
    alpha = TimeFn(lambda t: math.exp(2 * K * t), lambda t: 2 * K * math.exp(2 * K * t), "e^{2Kt}")
    c = TimeFn(
        lambda t: math.exp(4 * K * t) * n / (2 * t),
        lambda t: math.exp(4 * K * t) * n * (4 * K * t - 1) / (2 * t * t),
        "e^{4Kt} n/2t",
    )
    return alpha, c


def _li_xu_linear_pair(p: GeometryParams):
    n, K = p.n, p.K
    alpha = TimeFn(lambda t: 1 + 2 * K * t / 3, lambda t: 2 * K / 3, "1+2Kt/3")
    c = TimeFn(
        lambda t: n / (2 * t) + n * K / 2 * (1 + K * t / 3),
        lambda t: -n / (2 * t * t) + n * K * K / 6,
        "n/2t + nK/2(1+Kt/3)",
    )
    return alpha, c


def _li_xu_sinh_pair(p: GeometryParams):
    n, K = p.n, p.K

    def ratio(t):
        # (sinh cosh - x)/sinh^2 at x = Kt
        x = K * t
        if x > 300:
            return 1.0
        return _sinh_cosh_minus_x(x) / math.sinh(x) ** 2

    def alpha_d(t):
        x = K * t
        return 2 * K * (1 - _coth(x) * ratio(t))

    def c_f(t):
        return n * K / 2 * (_coth(K * t) + 1)

    def c_d(t):
        x = K * t
        if x > 300:
            return 0.0
        return -n * K * K / (2 * math.sinh(x) ** 2)

    alpha = TimeFn(lambda t: 1 + ratio(t), alpha_d, "1+(sinh cosh-Kt)/sinh^2")
    c = TimeFn(c_f, c_d, "nK/2(coth Kt + 1)")
    return alpha, c


def _theta_pair(theta: float, factor: float, p: GeometryParams):
    """alpha = e^{2 theta K t}, c = factor * nK e^{4 theta K t}/(e^{2 theta K t} - 1)."""
    n, K = p.n, p.K

    def k_over_expm1(t):
        # K/(e^{2 theta K t} - 1)
        return _x_over_expm1(2 * theta * K * t) / (2 * theta * t)

    def c_f(t):
        E = math.exp(2 * theta * K * t)
        return factor * n * E * E * k_over_expm1(t)

    def c_d(t):
        E = math.exp(2 * theta * K * t)
        q = k_over_expm1(t)
        return factor * n * 2 * theta * E * E * (E - 2) * q * q

    alpha = TimeFn(
        lambda t: math.exp(2 * theta * K * t),
        lambda t: 2 * theta * K * math.exp(2 * theta * K * t),
        f"e^(2*{theta:g}Kt)",
    )
    c = TimeFn(c_f, c_d, f"{factor:g} nK e^4θKt/(e^2θKt - 1)")
    return alpha, c


def _new_max_pair(alpha: float, p: GeometryParams):
    n, K = p.n, p.K
    first = TimeFn(lambda t: n * alpha**2 / (2 * t), lambda t: -n * alpha**2 / (2 * t * t), "n a^2/2t")
    if K <= 0:
        return constant(alpha), first
    t0 = (alpha - 1) / K
    level = n * alpha**2 * K / (2 * (alpha - 1))
    second = constant(level, f"{level:g}")
    return constant(alpha), piecewise(first, second, t0, "n a^2/2 max{1/t, K/(a-1)}")


def envelope_closed_form(alpha: float, p: GeometryParams) -> TimeFn:
    """Saturated second-case solution continuing n*alpha^2/2t past t0=(alpha-1)/K."""
    n, K = p.n, p.K
    rate = 2 * K / (alpha - 1)
    steady = K * n * alpha**2 / (4 * (alpha - 1))
    t0 = (alpha - 1) / K
    return TimeFn(
        lambda t: steady * (1 + math.exp(-rate * (t - t0))),
        lambda t: -steady * rate * math.exp(-rate * (t - t0)),
        "Kna^2/4(a-1) (1+e^{-2(Kt/(a-1)-1)})",
    )


def _new_spliced_pair(alpha: float, p: GeometryParams):
    n, K = p.n, p.K
    first = TimeFn(lambda t: n * alpha**2 / (2 * t), lambda t: -n * alpha**2 / (2 * t * t), "n a^2/2t")
    if K <= 0:
        return constant(alpha), first
    t0 = (alpha - 1) / K
    return constant(alpha), piecewise(first, envelope_closed_form(alpha, p), t0, "spliced")


# ---------------------------------------------------------------------------
# registry

ESTIMATE_IDS = (
    "li_yau",
    "davies",
    "hamilton",
    "bakry_qian",
    "li_xu_linear",
    "li_xu_sinh",
    "bbg",
    "new_max",
    "new_spliced",
    "theta_exp",
    "theta_exp_positive",
    "hamilton_refined",
)

LINEAR_IDS = tuple(i for i in ESTIMATE_IDS if i not in ("bakry_qian", "bbg"))

_REQUIRED = {
    "li_yau": ("alpha",),
    "davies": ("alpha",),
    "new_max": ("alpha",),
    "new_spliced": ("alpha",),
    "theta_exp": ("theta",),
    "theta_exp_positive": ("theta",),
}

_VALIDITY = {
    "li_yau": "α>1 (α=1 allowed iff K=0), K≥0",
    "davies": "α>1, K≥0",
    "hamilton": "K≥0",
    "bakry_qian": "K≥0",
    "li_xu_linear": "K≥0",
    "li_xu_sinh": "K>0",
    "bbg": "K>0, x=4h/(-nK) < 1+π²/(K²t²)",
    "new_max": "α>1, K≥0",
    "new_spliced": "α>1, K≥0",
    "theta_exp": "K≥0, θ>0",
    "theta_exp_positive": "K<0, θ∈(0,1/3]",
    "hamilton_refined": "K≥0",
}

_DISPLAY = {
    "li_yau": "Li-Yau bound (n a^2/2t + n a^2 K/2(a-1))",
    "davies": "Davies bound (n a^2/2t + n a^2 K/4(a-1))",
    "hamilton": "Hamilton bound (e^{2Kt}, e^{4Kt} n/2t)",
    "bakry_qian": "Bakry-Qian nonlinear bound",
    "li_xu_linear": "linear-in-time bound (1+2Kt/3)",
    "li_xu_sinh": "sinh bound (nK/2 (coth Kt + 1))",
    "bbg": "Bakry-Bolley-Gentil bound (Phi_t)",
    "new_max": "max bound (n a^2/2 max{1/t, K/(a-1)})",
    "new_spliced": "spliced bound (n a^2/2t then exponential envelope)",
    "theta_exp": "exponential-alpha bound, K>=0",
    "theta_exp_positive": "exponential-alpha bound, K<0",
    "hamilton_refined": "refined Hamilton bound (nK e^{4Kt}/(e^{2Kt}-1))",
}


def list_catalog():
    """All registered estimates as (id, required parameters, validity)."""
    return [CatalogEntry(i, _REQUIRED.get(i, ()), _VALIDITY[i]) for i in ESTIMATE_IDS]


def _fail(eid, why):
    raise ConstructionError(f"{eid} [{_DISPLAY[eid]}]: {why}")


def _check(eid, p: GeometryParams, extra):
    K = p.K
    alpha = extra.get("alpha")
    theta = extra.get("theta")
    if eid in ("li_yau", "davies", "new_max", "new_spliced"):
        if K < 0:
            _fail(eid, f"requires K>=0, got K={K:g}")
        if eid == "li_yau" and alpha == 1 and K == 0:
            return
        if not alpha > 1:
            cond = "α>1 (α=1 allowed iff K=0)" if eid == "li_yau" else "α>1"
            _fail(eid, f"requires {cond}, got α={alpha:g}, K={K:g}")
    elif eid in ("hamilton", "bakry_qian", "li_xu_linear", "hamilton_refined"):
        if K < 0:
            _fail(eid, f"requires K>=0, got K={K:g}")
    elif eid in ("li_xu_sinh", "bbg"):
        if not K > 0:
            _fail(eid, f"requires K>0, got K={K:g}")
    elif eid == "theta_exp":
        if K < 0:
            _fail(eid, f"requires K>=0, got K={K:g}")
        if not theta > 0:
            _fail(eid, f"requires θ>0, got θ={theta:g}")
    elif eid == "theta_exp_positive":
        if not K < 0:
            _fail(eid, f"requires K<0, got K={K:g}")
        if not 0 < theta <= 1 / 3 + 1e-15:
            _fail(eid, f"requires θ∈(0,1/3], got θ={theta:g}")


def make_estimate(eid: str, params: GeometryParams, extra: Optional[Mapping[str, float]] = None,
                  validate: bool = True, **kwargs) -> Estimate:
    """Build the estimate ``eid`` for geometry ``params``.

    ``alpha`` (or ``theta``) is passed through ``extra`` or as a keyword.
    With ``validate=False`` the parameter conditions are not enforced; this
    lets the condition checker report *why* a pair fails. In that mode the
    li_yau constant at alpha=1 drops its K-term (the K=0 form).
    """
    if eid not in ESTIMATE_IDS:
        raise ConstructionError(f"unknown estimate id {eid!r}; known: {', '.join(ESTIMATE_IDS)}")
    extra = dict(extra or {})
    extra.update(kwargs)
    unknown = set(extra) - set(_REQUIRED.get(eid, ()))
    if unknown:
        raise ConstructionError(f"{eid} takes no parameter(s) {sorted(unknown)}")
    for name in _REQUIRED.get(eid, ()):
        if name not in extra:
            raise ConstructionError(f"{eid} requires parameter {name!r}")
        extra[name] = float(extra[name])
    if validate:
        _check(eid, params, extra)

    p = params
    kind = "linear"
    alpha = c = None
    if eid == "li_yau":
        alpha, c = _li_yau_pair(extra["alpha"], p, 2)
    elif eid == "davies":
        alpha, c = _li_yau_pair(extra["alpha"], p, 4)
    elif eid == "hamilton":
        alpha, c = _hamilton_pair(p)
    elif eid == "li_xu_linear":
        alpha, c = _li_xu_linear_pair(p)
    elif eid == "li_xu_sinh":
        alpha, c = _li_xu_sinh_pair(p)
    elif eid == "new_max":
        alpha, c = _new_max_pair(extra["alpha"], p)
    elif eid == "new_spliced":
        alpha, c = _new_spliced_pair(extra["alpha"], p)
    elif eid == "theta_exp":
        theta = extra["theta"]
        alpha, c = _theta_pair(theta, max((1 - theta) / 2, theta), p)
    elif eid == "theta_exp_positive":
        theta = extra["theta"]
        alpha, c = _theta_pair(theta, theta, p)
    elif eid == "hamilton_refined":
        alpha, c = _theta_pair(1.0, 1.0, p)
    else:
        kind = eid
    return Estimate(eid, p, kind, alpha, c, extra, _VALIDITY[eid])


# ---------------------------------------------------------------------------
# nonlinear bounds


def _coth_series_branch(z: float) -> float:
    """y*coth(y) for z = y^2 >= 0, y*cot(y) for z = -y^2 < 0."""
    if abs(z) < 1e-6:
        return 1 + z / 3 - z * z / 45 + 2 * z**3 / 945
    if z > 0:
        y = math.sqrt(z)
        return y / math.tanh(y)
    y = math.sqrt(-z)
    return y / math.tan(y)


def bbg_phi(x: float, t: float, K: float) -> float:
    """Phi_t(x) of the Bakry-Bolley-Gentil bound, K > 0.

    Branch ``x <= 1`` uses coth, ``1 < x < 1 + pi^2/(K t)^2`` uses cot. Both
    branches are written through ``y coth y`` / ``y cot y`` (y = Kt sqrt|1-x|),
    which share a series near x = 1.
    """
    if not K > 0:
        raise DomainError(f"Phi_t needs K>0, got K={K!r}")
    z = (1 - x) * (K * t) ** 2
    if z <= -math.pi**2:
        raise DomainError(f"x={x!r} outside branch domain x < 1+pi^2/(K t)^2 at t={t!r}")
    # sqrt(1-x) coth(-Kt sqrt(1-x)) = -(y coth y)/(Kt), likewise for cot
    return -K / 2 * (x - 2 - 2 * _coth_series_branch(z) / (K * t))


def bbg_h_lower_limit(p: GeometryParams, t: float) -> float:
    """h must exceed this for the bbg branch condition to hold."""
    return -(p.n * p.K / 4) * (1 + math.pi**2 / (p.K * t) ** 2)


def _bbg_ceiling(p: GeometryParams, h: float, t: float) -> float:
    x = 4 * h / (-p.n * p.K)
    return p.n / 2 * bbg_phi(x, t, p.K)


def _bq_terms(p: GeometryParams, t: float):
    sqrt_nk = math.sqrt(p.n * p.K)
    c0 = p.n / (2 * t) + p.n * p.K / 4
    return sqrt_nk, c0


# ---------------------------------------------------------------------------
# evaluation


def residual(e: Estimate, s: SolutionState) -> float:
    """``g - bound``; nonpositive means the estimate holds at ``s``."""
    t = s.t
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    p = e.params
    if e.kind == "linear":
        return s.g - e.alpha(t) * s.h - e.c(t)
    if e.kind == "bakry_qian":
        sqrt_nk, c0 = _bq_terms(p, t)
        return s.g - s.h - sqrt_nk * math.sqrt(s.g + c0) - p.n / (2 * t)
    if e.kind == "bbg":
        return s.g - _bbg_ceiling(p, s.h, t)
    raise ConstructionError(f"unknown estimate kind {e.kind!r}")


def max_allowed_gradient(e: Estimate, h: float, t: float) -> Ceiling:
    """Largest g >= 0 with residual <= 0 at (h, t)."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    p = e.params
    if e.kind == "linear":
        value = e.alpha(t) * h + e.c(t)
    elif e.kind == "bakry_qian":
        sqrt_nk, c0 = _bq_terms(p, t)
        disc = p.n * p.K + 4 * (c0 + h + p.n / (2 * t))
        if disc < 0:
            return Ceiling(0.0, False)
        s = (sqrt_nk + math.sqrt(disc)) / 2
        value = s * s - c0
    elif e.kind == "bbg":
        value = _bbg_ceiling(p, h, t)
    else:
        raise ConstructionError(f"unknown estimate kind {e.kind!r}")
    if value < 0:
        return Ceiling(0.0, False)
    return Ceiling(value, True)


def coefficients_at(e: Estimate, t: float):
    """(alpha, alpha', c, c') of a linear estimate."""
    if not e.is_linear:
        raise ConstructionError(f"{e.id} is not a linear estimate")
    return e.alpha(t), derivative_at(e.alpha, t), e.c(t), derivative_at(e.c, t)
