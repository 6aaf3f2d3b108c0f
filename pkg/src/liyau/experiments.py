"""The nine acceptance experiments.

Each ``criterion_N`` runs one experiment at its stated tolerance and returns a
:class:`CriterionResult`. The test suite and the ``acceptance`` subcommand
both call these functions, so the numbers they print agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import LINEAR_IDS, GeometryParams, envelope_closed_form, list_catalog, make_estimate
from .compare import dominance
from .condition import grid_oracle, grid_threshold, quad_coeffs, verdict_from_coeffs, verify_estimate_condition
from .designer import closed_form_special, envelope_ode, pair_from_profile, quadratic_profile, sinh_profile, spliced_pair
from .errors import ConstructionError
from .kernels import evaluate, fd_check, fd_solve, harnack_check, make_kernel, verify_estimate
from .timefn import TimeFn, constant

__all__ = ["CriterionResult", "CRITERIA", "run_all", "single_mode", "random_smooth", "wrapped_gaussian", "applicable_estimates"]

ALPHAS = (1.5, 2.0)
THETAS = (0.1, 1 / 3, 1.0)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"criterion {self.number} [{self.name}]: {'PASS' if self.passed else 'FAIL'} ({self.detail})"


def applicable_estimates(p: GeometryParams, alphas=ALPHAS, thetas=THETAS, linear_only: bool = False):
    """Every catalog estimate valid at ``p``, one per alpha/theta choice."""
    out = []
    for entry in list_catalog():
        if linear_only and entry.id not in LINEAR_IDS:
            continue
        if "alpha" in entry.required:
            choices = [{"alpha": a} for a in alphas]
            if entry.id == "li_yau" and p.K == 0:
                choices.append({"alpha": 1.0})
        elif "theta" in entry.required:
            choices = [{"theta": th} for th in thetas]
        else:
            choices = [{}]
        for extra in choices:
            try:
                out.append(make_estimate(entry.id, p, extra))
            except ConstructionError:
                pass
    return out


def criterion_1() -> CriterionResult:
    worst = 0.0
    for n in (1, 2, 3):
        k = make_kernel("gaussian_rn", n)
        for t in np.geomspace(0.1, 10, 20):
            for r in np.linspace(0, 6 * math.sqrt(t), 20):
                s = evaluate(k, float(r), float(t))
                worst = max(worst, abs(s.g - s.h - n / (2 * t)))
    return CriterionResult(1, "gaussian sharpness", worst <= 1e-10, f"max |g-h-n/2t| = {worst:.3g}")


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def criterion_2() -> CriterionResult:
    ts = np.geomspace(0.01, 10, 200)
    worst = 0.0
    cases = [("quadratic", quadratic_profile(), K) for K in (0.5, 1.0, 2.0)]
    cases += [("sinh", sinh_profile(K), K) for K in (0.5, 1.0, 2.0)]
    for name, prof, K in cases:
        p = GeometryParams(K, 3)
        alpha, c = pair_from_profile(prof, p)
        a_ref, c_ref = closed_form_special(name, p)
        for t in ts:
            t = float(t)
            worst = max(worst, _rel(alpha(t), a_ref(t)), _rel(c(t), c_ref(t)))
    return CriterionResult(2, "profile pairs", worst <= 1e-8, f"max rel err = {worst:.3g}")


def criterion_3() -> CriterionResult:
    alpha, K, n = 2.0, 1.0, 2
    p = GeometryParams(K, n)
    t0 = (alpha - 1) / K
    ref = envelope_closed_form(alpha, p)
    sol = envelope_ode(constant(alpha), p, t0, ref(t0), 5.0, step=1e-3)
    worst = max(_rel(sol(float(t)), ref(float(t))) for t in np.linspace(1.0, 5.0, 401))
    _, _, report = spliced_pair(alpha, p, 5.0, step=1e-3)
    ok = worst <= 1e-6 and report.derivative_gap <= 1e-6
    return CriterionResult(
        3, "envelope ODE", ok, f"max rel err = {worst:.3g}, C1 gap = {report.derivative_gap:.3g}"
    )


def _random_pair(rng):
    # alpha = a0 + a1 t, c = c0 + c1/t + c2 t; a tenth of the draws sit at alpha = 1
    if rng.random() < 0.1:
        a0, a1 = 1.0, 0.0
    else:
        a0, a1 = rng.uniform(0.2, 4.0), rng.uniform(-0.5, 0.5) * rng.integers(0, 2)
    c0, c1, c2 = rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), rng.uniform(-0.5, 0.5)
    t = float(rng.uniform(0.05, 5.0))
    if a0 + a1 * t <= 0:
        a1 = 0.0
    if c0 + c1 / t + c2 * t <= 0:
        c2 = 0.0
    alpha = TimeFn(lambda s: a0 + a1 * s, lambda s: a1)
    c = TimeFn(lambda s: c0 + c1 / s + c2 * s, lambda s: -c1 / (s * s) + c2)
    p = GeometryParams(float(rng.uniform(-2.0, 3.0)), int(rng.integers(1, 6)))
    return alpha, c, p, t


def criterion_4(samples: int = 1000, seed: int = 20240) -> CriterionResult:
    rng = np.random.default_rng(seed)
    agree = 0
    counts = {}
    for _ in range(samples):
        alpha, c, p, t = _random_pair(rng)
        q = quad_coeffs(alpha, c, t, p)
        verdict = verdict_from_coeffs(q)
        counts[verdict.value] = counts.get(verdict.value, 0) + 1
        oracle = grid_oracle(q) <= grid_threshold(q)
        agree += verdict.holds == oracle
    mix = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    return CriterionResult(4, "condition equivalence", agree == samples, f"{agree}/{samples} agree; {mix}")


CATALOG_GEOMETRIES = ((0.0, 2), (1.0, 2), (2.0, 3), (0.5, 5))


def criterion_5() -> CriterionResult:
    failures = []
    checked = 0
    estimates = []
    for K, n in CATALOG_GEOMETRIES:
        estimates += applicable_estimates(GeometryParams(K, n), linear_only=True)
    estimates += [make_estimate("theta_exp_positive", GeometryParams(-2.0, 3), theta=th) for th in (0.1, 1 / 3)]
    for e in estimates:
        rep = verify_estimate_condition(e, 1e-2, 10.0, 100)
        checked += 1
        if not rep.holds:
            failures.append(f"{e.label()}@K={e.params.K:g},n={e.params.n:g}")
    covered = sorted({e.id for e in estimates})
    detail = f"{checked - len(failures)}/{checked} pass, {len(covered)} ids"
    if failures:
        detail += "; failing: " + ", ".join(failures)
    return CriterionResult(5, "catalog self-consistency", not failures and len(covered) == len(LINEAR_IDS), detail)


def criterion_6() -> CriterionResult:
    ts = np.geomspace(1e-2, 10, 50)
    rs = np.linspace(1e-3, 3, 50)
    worst = math.inf
    where = ""
    count = 0
    for kid in ("hyperbolic_h3", "sphere_s3"):
        k = make_kernel(kid)
        for e in applicable_estimates(k.params, thetas=(0.1, 1 / 3, 1.0) if k.params.K >= 0 else (0.1, 1 / 3)):
            rep = verify_estimate(k, e, rs, ts)
            count += 1
            if rep.min_slack < worst:
                worst, where = rep.min_slack, f"{kid}/{e.label()}"
    return CriterionResult(
        6, "model-space slack", worst >= -1e-8, f"{count} runs, min slack = {worst:.3g} at {where}"
    )


def criterion_7() -> CriterionResult:
    p = GeometryParams(1.0, 3)
    ts = (0.1, 1.0, 10.0)
    bbg = make_estimate("bbg", p)
    rivals = [make_estimate("li_yau", p, alpha=a) for a in ALPHAS]
    rivals += [make_estimate("davies", p, alpha=a) for a in ALPHAS]
    rivals += [make_estimate(i, p) for i in ("hamilton", "li_xu_linear", "li_xu_sinh", "bakry_qian")]
    pairs = [(bbg, r) for r in rivals]
    for a in ALPHAS:
        pairs.append((make_estimate("new_max", p, alpha=a), make_estimate("li_yau", p, alpha=a)))
        pairs.append((make_estimate("new_spliced", p, alpha=a), make_estimate("new_max", p, alpha=a)))
    worst = -math.inf
    failing = []
    for e1, e2 in pairs:
        rep = dominance(e1, e2, ts)
        worst = max(worst, rep.max_diff)
        if not rep.holds:
            failing.append(rep.verdict)
    detail = f"{len(pairs)} pairs, max ceiling diff = {worst:.3g}"
    if failing:
        detail += "; " + ", ".join(failing)
    return CriterionResult(7, "dominance", not failing, detail)


def criterion_8() -> CriterionResult:
    k = make_kernel("sphere_s3")
    grid = np.linspace(0.1, 2.0, 10)
    r_y = 1.0
    worst = math.inf
    count = 0
    for theta in (0.1, 1 / 3):
        for s in grid:
            for t in grid:
                if not s < t:
                    continue
                for d in (0.0, 0.5, 1.0):
                    ratio = harnack_check(k, theta, float(s), float(t), r_y + d, r_y, d)
                    worst = min(worst, ratio)
                    count += 1
    return CriterionResult(8, "harnack", worst >= 1 - 1e-8, f"{count} checks, min ratio = {worst:.6g}")


def single_mode(N: int) -> np.ndarray:
    x = 2 * math.pi * np.arange(N) / N
    return 1 + 0.5 * np.cos(x)


def random_smooth(N: int, seed: int = 0, modes: int = 5) -> np.ndarray:
    """A positive trigonometric polynomial with seeded coefficients."""
    rng = np.random.default_rng(seed)
    x = 2 * math.pi * np.arange(N) / N
    u = np.full(N, 1.0)
    for m in range(1, modes + 1):
        u += rng.uniform(-0.1, 0.1) * np.cos(m * x) + rng.uniform(-0.1, 0.1) * np.sin(m * x)
    return u


def wrapped_gaussian(N: int, t0: float = 0.05) -> np.ndarray:
    """The circle heat kernel at time ``t0``, sampled on the FD grid."""
    k = make_kernel("circle_flat", 1)
    x = 2 * math.pi * np.arange(N) / N
    return np.array([math.exp(evaluate(k, float(v), t0).log_u) for v in x])


def criterion_9() -> CriterionResult:
    e = make_estimate("li_yau", GeometryParams(0.0, 1), alpha=1.0)
    parts = []
    ok = True
    for N, floor in ((256, -0.05), (512, -0.015)):
        run = fd_solve(single_mode(N), N, 1.0)
        exact = 1 + 0.5 * np.exp(-run.times)[:, None] * np.cos(run.x)[None, :]
        decay = float(np.max(np.abs(run.u - exact)))
        drift = run.mass_drift()
        slack = fd_check(run, e, 0.05, 1.0).min_slack
        for init in (random_smooth(N), wrapped_gaussian(N)):
            slack = min(slack, fd_check(fd_solve(init, N, 1.0), e, 0.05, 1.0).min_slack)
        ok &= drift <= 1e-8 and slack >= floor and (N != 256 or decay <= 5e-3)
        parts.append(f"N={N}: decay err {decay:.2g}, mass drift {drift:.2g}, min slack {slack:.3g}")
    return CriterionResult(9, "fd solver", ok, "; ".join(parts))


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_all(numbers=None):
    return [CRITERIA[i]() for i in (numbers or sorted(CRITERIA))]
