import math

import pytest

from threearm import DesignParams, FilterKind, FilterRule, MixturePrior, SampleSizes, Scenario, derive_margins, filter_threshold
from threearm.errors import ParameterDomainError


@pytest.mark.parametrize(
    "rho, delta_N, delta, hist",
    [(0.5, 0.1, 0.1, 0.2), (0.5, 2.5, 2.5, 5.0), (1.0, 0.3, 0.0, 0.3), (0.25, 1.0, 3.0, 4.0)],
)
def test_derive_margins(rho, delta_N, delta, hist):
    d, h = derive_margins(rho, delta_N)
    assert d == pytest.approx(delta)
    assert h == pytest.approx(hist)


@pytest.mark.parametrize("rho", [0.0, -0.2, 1.5, float("nan")])
def test_rho_domain(rho):
    with pytest.raises(ParameterDomainError):
        derive_margins(rho, 0.1)


def test_params_derive_and_flag_override():
    p = DesignParams(0.5, 0.025, 0.5, 0.1)
    assert p.delta == pytest.approx(p.delta_N) and not p.delta_overridden
    assert p.z_alpha == pytest.approx(1.959963984540054, abs=1e-13)
    q = DesignParams(0.5, 0.025, 0.5, 0.1, delta=0.1)
    assert not q.delta_overridden
    r = DesignParams(0.5, 0.025, 0.5, 0.1, delta=0.05)
    assert r.delta_overridden and r.delta == 0.05


@pytest.mark.parametrize(
    "kwargs",
    [dict(sigma=0.0), dict(sigma=-1.0), dict(alpha=0.0), dict(alpha=0.5), dict(delta_N=-0.1), dict(delta=-1.0)],
)
def test_params_domain(kwargs):
    base = dict(sigma=0.5, alpha=0.025, rho=0.5, delta_N=0.1)
    base.update(kwargs)
    with pytest.raises(ParameterDomainError):
        DesignParams(**base)


def test_scenario_from_ratio(params):
    sc = Scenario.from_ratio(params, 0.2, 0.5)
    assert (sc.mu_E, sc.mu_R, sc.mu_P) == (0.2, pytest.approx(0.1), 0.0)
    with pytest.raises(ParameterDomainError):
        Scenario(math.inf, 0, 0)


def test_filter_thresholds(params):
    sizes = SampleSizes(538, 547, 159)
    assert filter_threshold(FilterRule.numbered(1), params, sizes) == pytest.approx(
        1.959963984540054 * 0.5 * math.sqrt(1 / 547 + 1 / 159), rel=1e-12
    )
    assert filter_threshold(FilterRule.numbered(1), params, sizes) == pytest.approx(0.0883, abs=1e-5)
    f2 = filter_threshold(FilterRule.numbered(2), params, sizes)
    assert f2 == pytest.approx(0.1 + 0.0883, abs=1e-4)
    assert filter_threshold(FilterRule.numbered(3), params, sizes) == pytest.approx(0.2)
    assert filter_threshold(FilterRule.numbered(4), params, sizes) == pytest.approx(0.15)
    assert filter_threshold(FilterRule.custom(0.07), params, sizes) == 0.07


def test_threshold_monotone_in_sizes(params):
    small, big_r, big_p = SampleSizes(100, 100, 100), SampleSizes(100, 101, 100), SampleSizes(100, 100, 101)
    for n in (1, 2):
        rule = FilterRule.numbered(n)
        t0 = filter_threshold(rule, params, small)
        assert filter_threshold(rule, params, big_r) < t0
        assert filter_threshold(rule, params, big_p) < t0
    for n in (3, 4):
        rule = FilterRule.numbered(n)
        assert filter_threshold(rule, params, small) == filter_threshold(rule, params, big_p)


def test_historical_filters_need_half_rho():
    p = DesignParams(0.5, 0.025, 0.4, 0.1)
    with pytest.raises(ParameterDomainError):
        filter_threshold(FilterRule.numbered(3), p, SampleSizes(10, 10, 10))
    assert filter_threshold(FilterRule.custom(0.25), p, SampleSizes(10, 10, 10)) == 0.25


def test_filter_rule_validation():
    with pytest.raises(ParameterDomainError):
        FilterRule.numbered(5)
    with pytest.raises(ParameterDomainError):
        FilterRule(FilterKind.CUSTOM)
    with pytest.raises(ParameterDomainError):
        FilterRule(FilterKind.SUPERIORITY, 0.1)
    assert FilterRule.numbered(2).label == "filter2"
    assert FilterRule.custom(0.5).label == "custom(0.5)"


def test_sample_sizes():
    s = SampleSizes(538, 547, 139, w_P=2.0)
    assert s.total == 1224 and s.recruited == 1363 and s.cost == 1363.0
    assert SampleSizes(10, 10, 7, w_P=1.5).recruited == 31
    for bad in ((1, 10, 10), (10, 2.5, 10), (True, 10, 10)):
        with pytest.raises(ParameterDomainError):
            SampleSizes(*bad)
    with pytest.raises(ParameterDomainError):
        SampleSizes(10, 10, 10, w_P=0.5)


def test_priors():
    assert MixturePrior.three_point(1.0).atoms == ((1.0, 1.0),)
    tp = MixturePrior.three_point(0.5)
    assert tp.atoms == ((1.0, 0.5), (0.75, 0.25), (0.5, 0.25))
    assert MixturePrior.three_point(0.0).atoms == ((0.75, 0.5), (0.5, 0.5))
    for bad in ([(1.0, 0.5)], [(1.2, 1.0)], [(0.5, 0.5), (0.5, 0.5)], [(1, 1.5), (0.5, -0.5)], []):
        with pytest.raises(ParameterDomainError):
            MixturePrior.from_pairs(bad)
    with pytest.raises(ParameterDomainError):
        MixturePrior.three_point(1.1)
