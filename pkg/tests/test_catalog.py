import math

import pytest

from liyau.catalog import (
    ESTIMATE_IDS,
    LINEAR_IDS,
    GeometryParams,
    SolutionState,
    bbg_phi,
    list_catalog,
    make_estimate,
    max_allowed_gradient,
    residual,
)
from liyau.errors import ConstructionError, DomainError


def test_li_yau_flat():
    e = make_estimate("li_yau", GeometryParams(0, 2), alpha=2)
    assert e.c(1.0) == 4.0
    assert e.alpha(1.0) == 2.0


def test_li_xu_linear():
    e = make_estimate("li_xu_linear", GeometryParams(3, 2))
    assert e.alpha(1.0) == pytest.approx(3.0)
    assert e.c(1.0) == pytest.approx(7.0)


def test_hamilton_refined():
    e = make_estimate("hamilton_refined", GeometryParams(1, 1))
    assert e.c(math.log(2) / 2) == pytest.approx(4.0)


def test_li_xu_sinh_value():
    e = make_estimate("li_xu_sinh", GeometryParams(1, 3))
    assert e.c(1.0) == pytest.approx(1.5 * (1 / math.tanh(1) + 1))
    assert e.alpha(1.0) == pytest.approx(1 + (math.sinh(1) * math.cosh(1) - 1) / math.sinh(1) ** 2)


def test_davies_half_of_li_yau_curvature_term():
    p = GeometryParams(2, 3)
    ly = make_estimate("li_yau", p, alpha=2)
    dv = make_estimate("davies", p, alpha=2)
    assert ly.c(1.0) - dv.c(1.0) == pytest.approx(3 * 4 * 2 / 4)


def test_new_max_kink():
    e = make_estimate("new_max", GeometryParams(1, 2), alpha=2)
    assert e.c(0.5) == pytest.approx(8.0)
    assert e.c(3.0) == pytest.approx(4.0)
    assert 1.0 in e.c.kinks


@pytest.mark.parametrize(
    "eid,K,extra",
    [
        ("li_yau", 1.0, {"alpha": 1.0}),
        ("li_yau", 1.0, {"alpha": 0.5}),
        ("davies", 0.0, {"alpha": 1.0}),
        ("li_xu_sinh", 0.0, {}),
        ("bbg", 0.0, {}),
        ("theta_exp", -1.0, {"theta": 0.5}),
        ("theta_exp_positive", 1.0, {"theta": 0.2}),
        ("theta_exp_positive", -1.0, {"theta": 0.5}),
        ("hamilton", -1.0, {}),
    ],
)
def test_construction_errors(eid, K, extra):
    with pytest.raises(ConstructionError) as info:
        make_estimate(eid, GeometryParams(K, 2), extra)
    assert eid in str(info.value)


def test_unknown_and_missing_parameters():
    p = GeometryParams(0, 2)
    with pytest.raises(ConstructionError):
        make_estimate("nope", p)
    with pytest.raises(ConstructionError):
        make_estimate("li_yau", p)
    with pytest.raises(ConstructionError):
        make_estimate("hamilton", p, alpha=2)


def test_li_yau_alpha_one_flat_allowed():
    e = make_estimate("li_yau", GeometryParams(0, 3), alpha=1)
    assert e.c(2.0) == pytest.approx(0.75)


def test_residual_gaussian_equality():
    e = make_estimate("li_yau", GeometryParams(0, 1), alpha=1)
    assert residual(e, SolutionState(1.0, 0.5, 1.0)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("eid", LINEAR_IDS)
def test_zero_state_residual_is_minus_c(eid):
    K = -2.0 if eid == "theta_exp_positive" else 1.0
    extra = {"alpha": 2.0} if eid in ("li_yau", "davies", "new_max", "new_spliced") else {}
    if eid.startswith("theta"):
        extra = {"theta": 0.25}
    e = make_estimate(eid, GeometryParams(K, 3), extra)
    assert residual(e, SolutionState(0.0, 0.0, 0.7)) == pytest.approx(-e.c(0.7))
    assert e.c(0.7) > 0


def test_bbg_continuous_at_one():
    K, t = 1.3, 0.8
    expected = K / 2 + 1 / t
    assert bbg_phi(1.0, t, K) == pytest.approx(expected, rel=1e-14)
    for eps in (1e-4, 1e-7, 1e-10):
        assert bbg_phi(1 - eps, t, K) == pytest.approx(expected, rel=1e-3)
        assert bbg_phi(1 + eps, t, K) == pytest.approx(expected, rel=1e-3)


def test_bbg_branch_limit():
    with pytest.raises(DomainError):
        bbg_phi(1 + math.pi**2 / 1.0 + 1e-9, 1.0, 1.0)


def test_ceiling_linear():
    e = make_estimate("li_yau", GeometryParams(0, 2), alpha=2)
    assert max_allowed_gradient(e, 1.0, 1.0).value == pytest.approx(6.0)
    low = max_allowed_gradient(e, -100.0, 1.0)
    assert low.value == 0.0 and not low.feasible


def test_ceiling_bakry_qian_flat():
    e = make_estimate("bakry_qian", GeometryParams(0, 3))
    assert max_allowed_gradient(e, 0.4, 2.0).value == pytest.approx(0.4 + 3 / 4)


def test_ceiling_bbg_against_bisection():
    p = GeometryParams(1, 3)
    e = make_estimate("bbg", p)
    h, t = -1.5, 1.0
    ceiling = max_allowed_gradient(e, h, t).value
    lo, hi = 0.0, 100.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if residual(e, SolutionState(mid, h, t)) <= 0:
            lo = mid
        else:
            hi = mid
    assert ceiling == pytest.approx(lo, rel=1e-12)


def test_ceiling_bakry_qian_solves_residual():
    e = make_estimate("bakry_qian", GeometryParams(2, 3))
    g = max_allowed_gradient(e, 0.3, 0.5).value
    assert residual(e, SolutionState(g, 0.3, 0.5)) == pytest.approx(0.0, abs=1e-10)


def test_list_catalog():
    entries = list_catalog()
    assert len(entries) == 12
    text = [str(e) for e in entries]
    assert "theta_exp_positive: K<0, θ∈(0,1/3]" in text
    assert any(s.startswith("li_yau: α>1 (α=1 allowed iff K=0)") for s in text)
    assert [e.id for e in entries] == list(ESTIMATE_IDS)


def test_params_validation():
    with pytest.raises(ValueError):
        GeometryParams(0, 0.5)
    with pytest.raises(ValueError):
        GeometryParams(math.nan, 2)
    with pytest.raises(ValueError):
        SolutionState(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        SolutionState(1.0, 0.0, 0.0)


def test_theta_small_k_branch():
    theta, t = 0.25, 0.5
    e = make_estimate("theta_exp", GeometryParams(1e-9, 2), theta=theta)
    limit = 2 / (2 * theta * t) * max((1 - theta) / 2, theta)
    assert e.c(t) == pytest.approx(limit, rel=1e-5)
    tiny = make_estimate("theta_exp", GeometryParams(1e-12, 2), theta=theta)
    assert tiny.c(t) == pytest.approx(limit, rel=1e-5)


def test_hamilton_exceeds_refined():
    for K in (0.1, 1.0, 3.0):
        p = GeometryParams(K, 2)
        a = make_estimate("hamilton", p)
        b = make_estimate("hamilton_refined", p)
        for t in (0.01, 0.3, 2.0):
            assert a.c(t) > b.c(t)
