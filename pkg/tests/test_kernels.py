import math

import numpy as np
import pytest

from liyau.catalog import GeometryParams, make_estimate
from liyau.errors import ConfigError, DomainError, InputError
from liyau.experiments import random_smooth, single_mode, wrapped_gaussian
from liyau.kernels import (
    KERNEL_IDS,
    evaluate,
    fd_check,
    fd_derivatives,
    fd_solve,
    harnack_check,
    make_kernel,
    verify_estimate,
)


def laplacian_factor(kid, r):
    return {
        "gaussian_rn": 2 / r,
        "hyperbolic_h3": 2 / math.tanh(r),
        "sphere_s3": 2 / math.tan(r),
        "circle_flat": 0.0,
    }[kid]


class TestEvaluate:
    def test_gaussian_example(self):
        s = evaluate(make_kernel("gaussian_rn", 1), 2.0, 1.0)
        assert s.g == pytest.approx(1.0) and s.h == pytest.approx(0.5)

    def test_gaussian_center(self):
        s = evaluate(make_kernel("gaussian_rn", 3), 0.0, 0.4)
        assert s.g == 0.0 and s.h == pytest.approx(-3 / 0.8)

    def test_hyperbolic_near_pole(self):
        t = 0.5
        s = evaluate(make_kernel("hyperbolic_h3"), 1e-6, t)
        assert s.g < 1e-10
        assert s.h == pytest.approx(-1.5 / t - 1, rel=1e-9)

    def test_sphere_pole_branch_continuous(self):
        k = make_kernel("sphere_s3")
        a, b = evaluate(k, 0.0, 0.7), evaluate(k, 1e-6, 0.7)
        assert a.log_u == pytest.approx(b.log_u, abs=1e-9)
        assert a.h == pytest.approx(b.h, rel=1e-8)

    def test_sphere_total_mass(self):
        # integral over S^3 of the kernel is 1: 4 pi int_0^pi u sin^2
        k = make_kernel("sphere_s3")
        th = np.linspace(0, math.pi, 4001)[:-1]
        vals = [math.exp(evaluate(k, float(v), 0.3).log_u) * math.sin(v) ** 2 for v in th]
        assert 4 * math.pi * np.trapezoid(vals + [0.0], np.append(th, math.pi)) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("kid", KERNEL_IDS)
    def test_heat_equation(self, kid):
        # log u solves l_t = l_rr + l_r^2 + (lap r) l_r
        k = make_kernel(kid, 3 if kid != "circle_flat" else 1)
        e = 1e-4

        def L(r, t):
            return evaluate(k, r, t).log_u

        for r in (0.3, 1.0, 2.0):
            for t in (0.1, 0.5, 2.0):
                s = evaluate(k, r, t)
                lt = (L(r, t + e) - L(r, t - e)) / (2 * e)
                lr = (L(r + e, t) - L(r - e, t)) / (2 * e)
                lrr = (L(r + e, t) - 2 * L(r, t) + L(r - e, t)) / e**2
                assert s.h == pytest.approx(lt, abs=1e-5 * (1 + abs(lt)))
                assert s.g == pytest.approx(lr * lr, abs=1e-5 * (1 + lr * lr))
                assert lt == pytest.approx(lrr + lr * lr + laplacian_factor(kid, r) * lr, abs=1e-4 * (1 + abs(lt)))

    def test_positive_everywhere(self):
        for kid in KERNEL_IDS:
            k = make_kernel(kid)
            for r in (0.0, 0.5, 3.0):
                for t in (0.01, 1.0, 10.0):
                    assert math.isfinite(evaluate(k, r, t).log_u)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            evaluate(make_kernel("sphere_s3"), math.pi, 1.0)
        with pytest.raises(DomainError):
            evaluate(make_kernel("gaussian_rn"), -1.0, 1.0)
        with pytest.raises(DomainError):
            evaluate(make_kernel("gaussian_rn"), 1.0, 0.0)
        with pytest.raises(ConfigError):
            make_kernel("torus")

    @pytest.mark.parametrize("kid", ["sphere_s3", "circle_flat"])
    def test_image_truncation(self, kid):
        a, b = make_kernel(kid, k_max=5), make_kernel(kid, k_max=8)
        for t in np.geomspace(1e-2, 5, 25):
            for r in np.linspace(1e-3, 3, 25):
                assert abs(evaluate(a, r, t).log_u - evaluate(b, r, t).log_u) < 1e-12

    def test_circle_semigroup(self):
        k = make_kernel("circle_flat", 1)
        N = 2048
        y = 2 * math.pi * np.arange(N) / N
        t1, t2 = 0.2, 0.35

        def u(x, t):
            return math.exp(evaluate(k, abs((x + math.pi) % (2 * math.pi) - math.pi), t).log_u)

        for x in (0.0, 1.0, 2.5):
            conv = sum(u(x - v, t1) * u(v, t2) for v in y) * (2 * math.pi / N)
            assert conv == pytest.approx(u(x, t1 + t2), abs=1e-6)


class TestVerify:
    def test_gaussian_equality(self):
        k = make_kernel("gaussian_rn", 2)
        e = make_estimate("li_yau", GeometryParams(0, 2), alpha=1)
        rep = verify_estimate(k, e, np.linspace(0, 3, 20), np.geomspace(0.01, 10, 20))
        assert abs(rep.min_slack) <= 1e-10
        assert max(abs(r.slack) for r in rep.rows) <= 1e-10

    def test_hyperbolic_li_xu(self):
        k = make_kernel("hyperbolic_h3")
        rep = verify_estimate(k, make_estimate("li_xu_linear", k.params), np.geomspace(1e-3, 10, 30),
                              np.geomspace(1e-2, 10, 30))
        assert rep.min_slack >= 0

    def test_sphere_theta(self):
        k = make_kernel("sphere_s3")
        e = make_estimate("theta_exp_positive", k.params, theta=1 / 3)
        rep = verify_estimate(k, e, np.linspace(1e-3, 3, 30), np.geomspace(1e-2, 10, 30))
        assert rep.min_slack >= -1e-8

    def test_mismatch(self):
        with pytest.raises(ConfigError):
            verify_estimate(make_kernel("hyperbolic_h3"), make_estimate("hamilton", GeometryParams(1, 3)), [1], [1])

    def test_csv(self):
        k = make_kernel("gaussian_rn", 2)
        e = make_estimate("li_yau", GeometryParams(0, 2), alpha=1)
        text = verify_estimate(k, e, [0.0, 1.0], [1.0]).to_csv().splitlines()
        assert text[0] == "kernel,estimate,r,t,g,h,slack"
        assert text[1].startswith("gaussian_rn,li_yau(alpha=1),0.0,1.0,")


class TestHarnack:
    k = make_kernel("sphere_s3")

    def test_degenerate(self):
        assert harnack_check(self.k, 1 / 3, 0.7, 0.7, 1.0, 1.0, 0.0) == 1.0

    def test_same_point(self):
        K, n, th = -2.0, 3, 1 / 3
        pref = ((1 - math.exp(2 * th * K)) / (1 - math.exp(2 * th * K * 0.5))) ** (n / 2)
        expected = pref * math.exp(evaluate(self.k, 1.0, 1.0).log_u - evaluate(self.k, 1.0, 0.5).log_u)
        ratio = harnack_check(self.k, th, 0.5, 1.0, 1.0, 1.0, 0.0)
        assert ratio == pytest.approx(expected, rel=1e-12)
        assert ratio >= 1

    def test_separated(self):
        assert harnack_check(self.k, 1 / 3, 0.5, 1.0, 2.0, 1.0, 1.0) >= 1

    def test_errors(self):
        with pytest.raises(DomainError):
            harnack_check(self.k, 1 / 3, 0.0, 1.0, 1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            harnack_check(self.k, 0.5, 0.5, 1.0, 1.0, 1.0, 0.0)
        with pytest.raises(ConfigError):
            harnack_check(make_kernel("hyperbolic_h3"), 0.2, 0.5, 1.0, 1.0, 1.0, 0.0)


class TestFD:
    e = make_estimate("li_yau", GeometryParams(0, 1), alpha=1)

    def test_constant(self):
        run = fd_solve(np.ones(128), 128, 1.0)
        assert np.max(np.abs(run.u - 1)) < 1e-14
        g, h = fd_derivatives(run, len(run.times) - 1)
        assert np.max(g) < 1e-20 and np.max(np.abs(h)) < 1e-12
        rep = fd_check(run, self.e, 0.1)
        assert rep.min_slack == pytest.approx(self.e.c(1.0), rel=1e-10)

    def test_single_mode(self):
        run = fd_solve(single_mode(256), 256, 1.0)
        exact = 1 + 0.5 * np.exp(-run.times)[:, None] * np.cos(run.x)[None, :]
        assert np.max(np.abs(run.u - exact)) <= 5e-3
        assert run.mass_drift() <= 1e-8
        assert run.dt <= run.dx

    def test_matches_circle_kernel(self):
        N, t0 = 256, 0.05
        run = fd_solve(wrapped_gaussian(N, t0), N, 0.5)
        k = make_kernel("circle_flat", 1)
        ref = np.array([math.exp(evaluate(k, float(x), t0 + run.times[-1]).log_u) for x in run.x])
        assert np.max(np.abs(run.u[-1] - ref)) < 1e-3

    def test_fd_derivatives_match_kernel(self):
        N, t0 = 256, 0.05
        run = fd_solve(wrapped_gaussian(N, t0), N, 1.0)
        k = make_kernel("circle_flat", 1)
        i = len(run.times) // 2
        g, h = fd_derivatives(run, i)
        for j in range(0, N, 16):
            s = evaluate(k, float(run.x[j]), t0 + run.times[i])
            assert abs(g[j] - s.g) <= 0.02 and abs(h[j] - s.h) <= 0.02

    def test_li_yau_slack(self):
        for init in (single_mode(256), random_smooth(256, seed=4)):
            rep = fd_check(fd_solve(init, 256, 1.0), self.e, 0.05, 1.0)
            assert rep.min_slack >= -0.05 and rep.passed()

    def test_bad_input(self):
        with pytest.raises(InputError):
            fd_solve(np.full(128, -1.0), 128, 1.0)
        with pytest.raises(InputError):
            fd_solve(np.ones(32), 32, 1.0)

    def test_geometry_mismatch(self):
        run = fd_solve(np.ones(64), 64, 0.2)
        with pytest.raises(ConfigError):
            fd_check(run, make_estimate("li_yau", GeometryParams(0, 2), alpha=1), 0.1)

    def test_csv_snapshot(self):
        run = fd_solve(np.ones(64), 64, 0.2)
        lines = run.to_csv().splitlines()
        assert lines[0] == "t,x,u"
        assert len(lines) == 1 + 64 * len(run.times)
