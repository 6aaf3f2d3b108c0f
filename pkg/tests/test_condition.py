import math

import pytest

from liyau.catalog import GeometryParams, make_estimate
from liyau.condition import (
    QuadCoeffs,
    Verdict,
    case1_check,
    case2_check,
    case2_slack,
    condition_b_holds,
    grid_oracle,
    quad_coeffs,
    verify_estimate_condition,
    verify_over_interval,
)
from liyau.designer import corollary_max_pair, spliced_pair
from liyau.errors import DomainError
from liyau.timefn import TimeFn, constant


def sharp(n):
    return TimeFn(lambda t: n / (2 * t), lambda t: -n / (2 * t * t))


class TestCoeffs:
    def test_gaussian_sharp_is_zero(self):
        q = quad_coeffs(constant(1.0), sharp(3), 0.7, GeometryParams(0, 3))
        assert (q.A, q.B, q.C) == pytest.approx((0, 0, 0), abs=1e-14)

    def test_direct_substitution(self):
        q = quad_coeffs(constant(2.0), constant(4.0), 1.0, GeometryParams(1, 2))
        assert (q.A, q.B, q.C) == pytest.approx((-0.25, 0.0, -4.0))

    def test_alpha_one_curved(self):
        q = quad_coeffs(constant(1.0), sharp(2), 1.0, GeometryParams(1, 2))
        assert q.A == 0 and q.B == pytest.approx(2.0) and q.C == pytest.approx(0.0, abs=1e-15)
        assert condition_b_holds(constant(1.0), sharp(2), 1.0, GeometryParams(1, 2)) is Verdict.FAILS

    def test_nonpositive_values_rejected(self):
        with pytest.raises(DomainError):
            quad_coeffs(constant(1.0), constant(-1.0), 1.0, GeometryParams(0, 2))


class TestCases:
    def test_case1_corollary_pair(self):
        p = GeometryParams(1, 2)
        alpha, c = corollary_max_pair(2.0, p)
        assert case1_check(alpha, c, 0.5, p)

    def test_case1_sharp_flat(self):
        assert case1_check(constant(1.0), sharp(2), 1.3, GeometryParams(0, 2))

    def test_case1_fails_curved(self):
        assert not case1_check(constant(1.0), sharp(2), 1.3, GeometryParams(1, 2))

    def test_case2_envelope_one_dimensional(self):
        p = GeometryParams(1, 1)
        c = TimeFn(lambda t: 1 + math.exp(-2 * (t - 1)), lambda t: -2 * math.exp(-2 * (t - 1)))
        for t in (1.0, 1.7, 4.0):
            assert case2_check(constant(2.0), c, t, p)
            assert case2_slack(constant(2.0), c, t, p) == pytest.approx(0.0, abs=1e-12)

    def test_case2_theorem7_quadratic(self):
        p = GeometryParams(1.5, 3)
        e = make_estimate("li_xu_linear", p)
        for t in (0.05, 1.0, 6.0):
            assert case2_check(e.alpha, e.c, t, p)
            assert abs(case2_slack(e.alpha, e.c, t, p)) <= 1e-8 * max(1.0, e.c(t))

    def test_case2_alpha_one_fails(self):
        assert not case2_check(constant(1.0), constant(5.0), 1.0, GeometryParams(1, 2))


class TestVerdict:
    def test_degenerate(self):
        assert condition_b_holds(constant(1.0), sharp(2), 2.0, GeometryParams(0, 2)) is Verdict.HOLDS_DEGENERATE

    def test_li_xu_sinh(self):
        e = make_estimate("li_xu_sinh", GeometryParams(1, 3))
        assert condition_b_holds(e.alpha, e.c, 1.0, e.params) is Verdict.HOLDS_CASE2

    def test_small_constant_fails(self):
        p = GeometryParams(1, 2)
        q = quad_coeffs(constant(2.0), constant(0.02), 1.0, p)
        assert condition_b_holds(constant(2.0), constant(0.02), 1.0, p) is Verdict.FAILS
        assert grid_oracle(q) > 0

    def test_holds_property(self):
        assert Verdict.HOLDS_CASE1.holds and not Verdict.FAILS.holds


class TestOracle:
    def test_zero(self):
        assert grid_oracle(QuadCoeffs(0, 0, 0, 1.0)) == 0

    def test_double_root(self):
        value = grid_oracle(QuadCoeffs(-1, 2, -1, 1.0))
        assert -1e-6 < value <= 0
        assert grid_oracle(QuadCoeffs(-1, 2, -1, 1.0), x_max=2.0, points=3) == 0

    def test_failing_vertex(self):
        q = QuadCoeffs(-1, 3, -1, 1.0)
        assert grid_oracle(q) == pytest.approx(1.25, abs=1e-6)
        assert q.max_on_halfline() == pytest.approx(1.25)


class TestInterval:
    def test_corollary_pair_case1(self):
        p = GeometryParams(1, 2)
        alpha, c = corollary_max_pair(2.0, p)
        rep = verify_over_interval(alpha, c, p, 0.01, 10, 100)
        assert rep.holds
        assert set(rep.verdicts()) == {Verdict.HOLDS_CASE1}
        # the kink is checked from both sides
        assert [r.side for r in rep.rows if r.t == 1.0] == [-1, 1]

    def test_spliced_switches_case(self):
        p = GeometryParams(1, 2)
        alpha, c, _ = spliced_pair(2.0, p, 10.0)
        rep = verify_over_interval(alpha, c, p, 0.01, 10, 100)
        assert rep.holds
        t0 = 1.0
        assert all(r.verdict is Verdict.HOLDS_CASE1 for r in rep.rows if r.t < t0)
        assert all(r.verdict is Verdict.HOLDS_CASE2 for r in rep.rows if r.t > t0 + 1e-3)

    def test_degenerate_everywhere(self):
        rep = verify_over_interval(constant(1.0), sharp(2), GeometryParams(0, 2), 0.1, 10, 30)
        assert set(rep.verdicts()) == {Verdict.HOLDS_DEGENERATE}

    def test_failure_is_reported(self):
        e = make_estimate("li_yau", GeometryParams(1, 2), alpha=1.0, validate=False)
        rep = verify_estimate_condition(e, 0.1, 1, 10)
        assert not rep.holds and len(rep.rows) == 10

    def test_csv_columns(self):
        rep = verify_over_interval(constant(1.0), sharp(2), GeometryParams(0, 2), 0.1, 10, 3)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "t,A,B,C,verdict,margin"
        assert lines[1].startswith("0.1,")

    def test_nonlinear_rejected(self):
        with pytest.raises(DomainError):
            verify_estimate_condition(make_estimate("bbg", GeometryParams(1, 3)), 0.1, 1)

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            verify_over_interval(constant(1.0), sharp(2), GeometryParams(0, 2), 1.0, 0.5)
