"""Success probabilities of the adaptive three-arm design.

The three decision statistics are

* ``T_EP`` -- superiority of E over placebo, ``(X_E - X_P) / se_EP``,
* ``T_ER`` -- non-inferiority of E to R, ``(X_E - X_R + delta_N) / se_ER``,
* ``W``    -- reference over placebo, ``(X_R - X_P) / se_RP``,

with ``se_ab = sigma * sqrt(1/n_a + 1/n_b)``. Delta-superiority is the event
``T_EP >= z + delta / se_EP`` and the filter is ``W >= tau / se_RP``, so every
success probability is one trivariate normal rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .design import (
    DesignParams,
    FilterRule,
    MixturePrior,
    SampleSizes,
    Scenario,
    StrategyKind,
    _threshold,
)
from .gaussian import DEFAULT_TOL, Rect3, TrivariateNormal, rect_prob, std_normal_cdf

_INF = math.inf


@dataclass(frozen=True, eq=False)
class JointLaw:
    dist: TrivariateNormal
    crit: float
    delta_shift: float
    filter_cutoff: float
    se_EP: float
    se_ER: float
    se_RP: float


@dataclass(frozen=True)
class PowerBreakdown:
    p_filter: float
    power1: float
    power2: float
    total: float
    error: float = 0.0


@dataclass(frozen=True)
class AtomResult:
    v: float
    weight: float
    breakdown: PowerBreakdown


@dataclass(frozen=True)
class MixtureSuccess:
    success: float
    atoms: Tuple[AtomResult, ...]

    def by_ratio(self, v: float) -> PowerBreakdown:
        for atom in self.atoms:
            if math.isclose(atom.v, v):
                return atom.breakdown
        raise KeyError(v)


@dataclass(frozen=True)
class ConditionReport:
    holds: bool
    lhs: float
    rhs: float
    slack: float


def statistic_correlations(n_E: float, n_R: float, n_P: float) -> np.ndarray:
    iE, iR, iP = 1.0 / n_E, 1.0 / n_R, 1.0 / n_P
    s_ep = math.sqrt(iE + iP)
    s_er = math.sqrt(iE + iR)
    s_rp = math.sqrt(iR + iP)
    r_ep_er = iE / (s_ep * s_er)
    r_ep_w = iP / (s_ep * s_rp)
    r_er_w = -iR / (s_er * s_rp)
    return np.array([
        [1.0, r_ep_er, r_ep_w],
        [r_ep_er, 1.0, r_er_w],
        [r_ep_w, r_er_w, 1.0],
    ])


def _joint_law(params, n_E, n_R, n_P, scenario, rule) -> JointLaw:
    sigma = params.sigma
    se_ep = sigma * math.sqrt(1.0 / n_E + 1.0 / n_P)
    se_er = sigma * math.sqrt(1.0 / n_E + 1.0 / n_R)
    se_rp = sigma * math.sqrt(1.0 / n_R + 1.0 / n_P)
    mean = np.array([
        (scenario.mu_E - scenario.mu_P) / se_ep,
        (scenario.mu_E - scenario.mu_R + params.delta_N) / se_er,
        (scenario.mu_R - scenario.mu_P) / se_rp,
    ])
    tau = _threshold(rule, params, n_R, n_P)
    return JointLaw(
        dist=TrivariateNormal(mean, statistic_correlations(n_E, n_R, n_P)),
        crit=params.z_alpha,
        delta_shift=params.delta / se_ep,
        filter_cutoff=tau / se_rp,
        se_EP=se_ep,
        se_ER=se_er,
        se_RP=se_rp,
    )


def joint_law(
    params: DesignParams, sizes: SampleSizes, scenario: Scenario, rule: FilterRule
) -> JointLaw:
    return _joint_law(params, sizes.n_E, sizes.n_R, sizes.n_P, scenario, rule)


def _breakdown(law: JointLaw, strategy: StrategyKind, tol: float) -> PowerBreakdown:
    z = law.crit
    c = law.filter_cutoff
    p_filter = float(std_normal_cdf(law.dist.mean[2] - c))
    # power 1: superiority, non-inferiority and filter (same for both strategies)
    p1 = rect_prob(law.dist, Rect3([z, z, c], [_INF, _INF, _INF]), tol)
    # power 2: delta-superiority (which implies superiority) without the filter;
    # the formal hierarchy also needs non-inferiority on the way
    d_low = max(z, z + law.delta_shift)
    er_low = z if strategy is StrategyKind.FORMAL else -_INF
    p2 = rect_prob(law.dist, Rect3([d_low, er_low, -_INF], [_INF, _INF, c]), tol)
    return PowerBreakdown(
        p_filter=p_filter,
        power1=p1.value,
        power2=p2.value,
        total=p1.value + p2.value,
        error=p1.error + p2.error,
    )


def power_breakdown(
    params: DesignParams,
    sizes: SampleSizes,
    scenario: Scenario,
    rule: FilterRule,
    strategy: StrategyKind = StrategyKind.FORMAL,
    tol: float = DEFAULT_TOL,
) -> PowerBreakdown:
    return _breakdown(joint_law(params, sizes, scenario, rule), strategy, tol)


def _mixture(params, n, prior, rule, strategy, effect_E, tol) -> MixtureSuccess:
    atoms = []
    success = 0.0
    for v, weight in prior.atoms:
        scenario = Scenario.from_ratio(params, effect_E, v)
        bd = _breakdown(_joint_law(params, *n, scenario, rule), strategy, tol)
        atoms.append(AtomResult(v, weight, bd))
        success += weight * bd.total
    return MixtureSuccess(success, tuple(atoms))


def mixture_success(
    params: DesignParams,
    sizes: SampleSizes,
    prior: MixturePrior,
    rule: FilterRule,
    strategy: StrategyKind,
    effect_E: float,
    tol: float = DEFAULT_TOL,
) -> MixtureSuccess:
    """Prior-weighted success probability over the effect ratios of ``prior``."""
    return _mixture(params, sizes.as_tuple(), prior, rule, strategy, effect_E, tol)


def _condition(params, n_E, n_R, n_P) -> ConditionReport:
    s_er = math.sqrt(1.0 / n_E + 1.0 / n_R)
    s_rp = math.sqrt(1.0 / n_R + 1.0 / n_P)
    s_ep = math.sqrt(1.0 / n_E + 1.0 / n_P)
    lhs = (s_er + s_rp - s_ep) * params.z_alpha
    rhs = (params.delta_N + params.delta) / params.sigma
    return ConditionReport(holds=lhs <= rhs, lhs=lhs, rhs=rhs, slack=rhs - lhs)


def equivalence_condition(params: DesignParams, sizes: SampleSizes) -> ConditionReport:
    """Sample-size condition under which the formal and intuitive strategies
    reach the same success decision for every data set (Filter 1)."""
    return _condition(params, sizes.n_E, sizes.n_R, sizes.n_P)
