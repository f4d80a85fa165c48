import math

import numpy as np
import pytest

from threearm import (
    DesignParams,
    FilterRule,
    MixturePrior,
    SampleSizes,
    Scenario,
    StrategyKind,
    equivalence_condition,
    joint_law,
    mixture_success,
    power_breakdown,
    statistic_correlations,
)

FORMAL, INTUITIVE = StrategyKind.FORMAL, StrategyKind.INTUITIVE


def test_equal_allocation_correlations():
    c = statistic_correlations(100, 100, 100)
    np.testing.assert_allclose(c, [[1, 0.5, 0.5], [0.5, 1, -0.5], [0.5, -0.5, 1]], atol=1e-15)


def test_correlation_matrix_is_rank_two():
    c = statistic_correlations(531, 68, 529)
    assert np.linalg.eigvalsh(c)[0] == pytest.approx(0.0, abs=1e-14)


def test_joint_law_means(params, filter1):
    sizes = SampleSizes(538, 547, 159)
    sc = Scenario(0.2, 0.15, 0.0)
    law = joint_law(params, sizes, sc, filter1)
    s = params.sigma
    assert law.dist.mean[0] == pytest.approx(0.2 / (s * math.sqrt(1 / 538 + 1 / 159)))
    assert law.dist.mean[1] == pytest.approx((0.05 + 0.1) / (s * math.sqrt(1 / 538 + 1 / 547)))
    assert law.dist.mean[2] == pytest.approx(0.15 / (s * math.sqrt(1 / 547 + 1 / 159)))
    assert law.filter_cutoff == pytest.approx(params.z_alpha)
    assert law.delta_shift == pytest.approx(0.1 / law.se_EP)


def test_linear_reconstruction(params):
    rng = np.random.default_rng(1)
    nE, nR, nP = 300, 250, 120
    s = params.sigma
    xe, xr, xp = rng.normal(size=(3, 1000))
    se_ep = s * math.sqrt(1 / nE + 1 / nP)
    se_er = s * math.sqrt(1 / nE + 1 / nR)
    se_rp = s * math.sqrt(1 / nR + 1 / nP)
    t_delta = (xe - xp - params.delta) / se_ep
    t_ni = (xe - xr + params.delta_N) / se_er
    w = (xr - xp) / se_rp
    lhs = w * math.sqrt(1 / nR + 1 / nP)
    rhs = t_delta * math.sqrt(1 / nE + 1 / nP) - t_ni * math.sqrt(1 / nE + 1 / nR) + (params.delta_N + params.delta) / s
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_null_reference_filter_is_alpha(params, filter1):
    for sizes in (SampleSizes(531, 68, 529), SampleSizes(40, 90, 15)):
        bd = power_breakdown(params, sizes, Scenario(0.2, 0.0, 0.0), filter1)
        assert bd.p_filter == pytest.approx(0.025, abs=1e-12)


@pytest.mark.parametrize(
    "sc, sizes, want",
    [
        (1, (538, 547, 159), (0.993, 0.900, 0.000)),
        (2, (288, 284, 472), (0.759, 0.756, 0.144)),
        (3, (531, 68, 529), (0.025, 0.022, 0.878)),
    ],
)
def test_power_split_at_reported_sizes(params, filter1, scenarios, sc, sizes, want):
    bd = power_breakdown(params, SampleSizes(*sizes), scenarios[sc], filter1)
    assert (bd.p_filter, bd.power1, bd.power2) == pytest.approx(want, abs=0.003)
    assert bd.total == pytest.approx(0.900, abs=0.003)
    assert bd.total == pytest.approx(bd.power1 + bd.power2, abs=1e-9)
    assert bd.power1 <= bd.p_filter


def test_scenario1_truth_at_scenario3_sizes(params, filter1, scenarios):
    assert power_breakdown(params, SampleSizes(531, 68, 529), scenarios[1], filter1).total == pytest.approx(0.323, abs=0.005)


def test_formal_never_exceeds_intuitive(params):
    rng = np.random.default_rng(8)
    for _ in range(30):
        sizes = SampleSizes(*rng.integers(5, 400, 3))
        sc = Scenario(rng.uniform(0, 0.3), rng.uniform(-0.1, 0.3), 0.0)
        rule = FilterRule.numbered(int(rng.integers(1, 5)))
        f = power_breakdown(params, sizes, sc, rule, FORMAL)
        i = power_breakdown(params, sizes, sc, rule, INTUITIVE)
        assert f.total <= i.total + 2e-7
        assert f.power1 == i.power1


def test_strategies_agree_when_condition_holds(params, filter1):
    sizes = SampleSizes(100, 100, 100)
    assert equivalence_condition(params, sizes).holds
    for v in (0.0, 0.5, 1.0):
        sc = Scenario.from_ratio(params, 0.2, v)
        f = power_breakdown(params, sizes, sc, filter1, FORMAL)
        i = power_breakdown(params, sizes, sc, filter1, INTUITIVE)
        assert f.total == pytest.approx(i.total, abs=2e-7)


def test_strategies_differ_when_condition_fails(params, filter1):
    sizes = SampleSizes(400, 4, 400)
    assert not equivalence_condition(params, sizes).holds
    sc = Scenario.from_ratio(params, 0.2, 0.0)
    f = power_breakdown(params, sizes, sc, filter1, FORMAL)
    i = power_breakdown(params, sizes, sc, filter1, INTUITIVE)
    assert i.total - f.total > 1e-4


def test_zero_delta_override_uses_superiority_gate():
    p = DesignParams(0.5, 0.025, 0.5, 0.1, delta=0.0)
    sizes = SampleSizes(120, 120, 60)
    sc = Scenario(0.1, 0.05, 0.0)
    bd = power_breakdown(p, sizes, sc, FilterRule.numbered(1), INTUITIVE)
    law = joint_law(p, sizes, sc, FilterRule.numbered(1))
    from threearm import Rect3, rect_prob

    want = rect_prob(law.dist, Rect3([law.crit, -np.inf, -np.inf], [np.inf, np.inf, law.filter_cutoff])).value
    assert bd.power2 == pytest.approx(want, abs=1e-9)


def test_mixture_is_affine_and_reports_atoms(params, filter1):
    sizes = SampleSizes(465, 479, 305)
    mix = mixture_success(params, sizes, MixturePrior.three_point(0.5), filter1, FORMAL, 0.2)
    totals = [mix.by_ratio(v).total for v in (1.0, 0.75, 0.5)]
    assert totals == pytest.approx([0.867, 0.982, 0.884], abs=0.005)
    assert mix.success == pytest.approx(0.5 * totals[0] + 0.25 * totals[1] + 0.25 * totals[2], abs=1e-12)
    assert mix.success == pytest.approx(0.90, abs=0.003)
    point = mixture_success(params, sizes, MixturePrior.three_point(1.0), filter1, FORMAL, 0.2)
    assert point.success == pytest.approx(totals[0], abs=1e-12)
    with pytest.raises(KeyError):
        point.by_ratio(0.5)


def test_mixture_table_values_p08(params, filter1):
    mix = mixture_success(params, SampleSizes(530, 541, 218), MixturePrior.three_point(0.8), filter1, FORMAL, 0.2)
    assert [a.breakdown.total for a in mix.atoms] == pytest.approx([0.903, 0.964, 0.809], abs=0.005)


def test_equivalence_condition_values(params):
    c = equivalence_condition(params, SampleSizes(538, 547, 159))
    assert c.holds and c.lhs == pytest.approx(0.11868, abs=5e-6) and c.rhs == pytest.approx(0.4)
    assert c.slack == pytest.approx(0.28132, abs=5e-5)
    c = equivalence_condition(params, SampleSizes(100, 100, 100))
    assert c.lhs == pytest.approx(math.sqrt(0.02) * 1.959963984540054, abs=1e-12)
    zero = DesignParams(0.5, 0.025, 0.5, 0.0)
    assert not equivalence_condition(zero, SampleSizes(1000, 1000, 1000)).holds
