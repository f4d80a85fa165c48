"""Decision procedures and confidence intervals for observed trial summaries."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from scipy import stats

from .design import DesignParams, FilterKind, FilterRule, StrategyKind, _threshold
from .errors import InputError, NumericDomainError, ParameterDomainError
from .power import ConditionReport, _condition

ARMS = ("E", "R", "P")


class SigmaSource(enum.Enum):
    KNOWN = "known"
    POOLED = "pooled"


class Verdict(enum.Enum):
    SUCCESS_NON_INFERIORITY = "SuccessViaNonInferiority"
    SUCCESS_DELTA_SUPERIORITY = "SuccessViaDeltaSuperiority"
    NO_SUCCESS = "NoSuccess"

    @property
    def success(self) -> bool:
        return self is not Verdict.NO_SUCCESS


@dataclass(frozen=True)
class ArmSummary:
    label: str
    n: int
    mean: float
    sd: float

    def __post_init__(self):
        if self.label not in ARMS:
            raise InputError(f"arm label must be one of {ARMS}, got {self.label!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise InputError(f"arm {self.label}: n must be an integer >= 2, got {self.n}")
        if not math.isfinite(self.mean):
            raise InputError(f"arm {self.label}: mean must be finite")
        if not (math.isfinite(self.sd) and self.sd >= 0):
            raise InputError(f"arm {self.label}: sd must be finite and >= 0")
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class DecisionStep:
    name: str
    statistic: float
    critical: float
    outcome: bool


@dataclass(frozen=True)
class DecisionTrace:
    steps: Tuple[DecisionStep, ...]
    verdict: Verdict
    strategy: StrategyKind
    condition_holds: bool

    def step(self, name: str) -> Optional[DecisionStep]:
        for s in self.steps:
            if s.name == name:
                return s
        return None


@dataclass(frozen=True)
class DivergenceReport:
    in_divergence_event: bool
    formal: Verdict
    intuitive: Verdict
    condition: ConditionReport

    @property
    def verdicts_agree(self) -> bool:
        return self.formal.success == self.intuitive.success


def arms_by_label(summaries: Iterable[ArmSummary]) -> Dict[str, ArmSummary]:
    arms: Dict[str, ArmSummary] = {}
    for s in summaries:
        if s.label in arms:
            raise InputError(f"duplicate summary for arm {s.label}")
        arms[s.label] = s
    missing = [a for a in ARMS if a not in arms]
    if missing:
        raise InputError(f"missing arm(s): {', '.join(missing)}")
    return arms


def _coerce_source(sigma_source) -> SigmaSource:
    try:
        return SigmaSource(sigma_source) if not isinstance(sigma_source, SigmaSource) else sigma_source
    except ValueError:
        raise ParameterDomainError(f"unknown sigma source {sigma_source!r}") from None


def _pair_se(a: ArmSummary, b: ArmSummary, source: SigmaSource, sigma: Optional[float]):
    """Standard error of mean_a - mean_b and its degrees of freedom."""
    root = math.sqrt(1.0 / a.n + 1.0 / b.n)
    if source is SigmaSource.KNOWN:
        if sigma is None or not sigma > 0:
            raise ParameterDomainError("known-sigma analysis needs sigma > 0")
        return sigma * root, math.inf
    df = a.n + b.n - 2
    pooled = math.sqrt(((a.n - 1) * a.sd**2 + (b.n - 1) * b.sd**2) / df)
    if pooled == 0.0:
        raise NumericDomainError(f"pooled sd of arms {a.label}, {b.label} is zero")
    return pooled * root, df


def _quantile(q: float, df: float, quantile: str) -> float:
    if quantile == "normal" or math.isinf(df):
        return float(stats.norm.ppf(q))
    if quantile == "t":
        return float(stats.t.ppf(q, df))
    raise ParameterDomainError(f"quantile must be 'normal' or 't', got {quantile!r}")


def pairwise_ci(
    summary_a: ArmSummary,
    summary_b: ArmSummary,
    level: float = 0.95,
    sigma_source="pooled",
    sigma: Optional[float] = None,
    quantile: str = "normal",
) -> Tuple[float, float]:
    """Two-sided interval for ``mean_a - mean_b``."""
    if not 0.0 < level < 1.0:
        raise ParameterDomainError(f"level must lie in (0, 1), got {level}")
    se, df = _pair_se(summary_a, summary_b, _coerce_source(sigma_source), sigma)
    half = _quantile((1.0 + level) / 2.0, df, quantile) * se
    diff = summary_a.mean - summary_b.mean
    return diff - half, diff + half


@dataclass(frozen=True)
class _Stats:
    t_sup: float
    t_ni: float
    t_delta: float
    crit_ep: float
    crit_er: float
    diff_rp: float
    tau: float


def _statistics(arms, params, rule, source, quantile) -> _Stats:
    E, R, P = arms["E"], arms["R"], arms["P"]
    se_ep, df_ep = _pair_se(E, P, source, params.sigma)
    se_er, df_er = _pair_se(E, R, source, params.sigma)
    se_rp, df_rp = _pair_se(R, P, source, params.sigma)
    q = 1.0 - params.alpha
    crit_rp = _quantile(q, df_rp, quantile)
    if rule.kind is FilterKind.SUPERIORITY:
        tau = crit_rp * se_rp
    elif rule.kind is FilterKind.DELTA_SUPERIORITY:
        tau = params.delta + crit_rp * se_rp
    else:
        tau = _threshold(rule, params, R.n, P.n)
    return _Stats(
        t_sup=(E.mean - P.mean) / se_ep,
        t_ni=(E.mean - R.mean + params.delta_N) / se_er,
        t_delta=(E.mean - P.mean - params.delta) / se_ep,
        crit_ep=_quantile(q, df_ep, quantile),
        crit_er=_quantile(q, df_er, quantile),
        diff_rp=R.mean - P.mean,
        tau=tau,
    )


def _run(st: _Stats, strategy: StrategyKind):
    steps: List[DecisionStep] = []
    sup = st.t_sup >= st.crit_ep
    steps.append(DecisionStep("H_EP^S", st.t_sup, st.crit_ep, sup))
    if not sup:
        return steps, Verdict.NO_SUCCESS
    filt = DecisionStep("filter", st.diff_rp, st.tau, st.diff_rp >= st.tau)
    ni = DecisionStep("H_ER^N", st.t_ni, st.crit_er, st.t_ni >= st.crit_er)
    dsup = DecisionStep("H_EP^delta", st.t_delta, st.crit_ep, st.t_delta >= st.crit_ep)
    if strategy is StrategyKind.INTUITIVE:
        steps.append(filt)
        if filt.outcome:
            steps.append(ni)
            return steps, Verdict.SUCCESS_NON_INFERIORITY if ni.outcome else Verdict.NO_SUCCESS
        steps.append(dsup)
        return steps, Verdict.SUCCESS_DELTA_SUPERIORITY if dsup.outcome else Verdict.NO_SUCCESS
    # formal: fixed hierarchy, the filter only interprets the rejections
    steps.append(ni)
    if ni.outcome:
        steps.append(dsup)
    steps.append(filt)
    if ni.outcome and filt.outcome:
        return steps, Verdict.SUCCESS_NON_INFERIORITY
    if ni.outcome and dsup.outcome and not filt.outcome:
        return steps, Verdict.SUCCESS_DELTA_SUPERIORITY
    return steps, Verdict.NO_SUCCESS


def decide(
    summaries: Iterable[ArmSummary],
    params: DesignParams,
    rule: FilterRule,
    strategy: StrategyKind = StrategyKind.INTUITIVE,
    sigma_source="pooled",
    quantile: str = "normal",
) -> DecisionTrace:
    """Apply the intuitive or formal decision procedure to observed summaries."""
    arms = arms_by_label(summaries)
    st = _statistics(arms, params, rule, _coerce_source(sigma_source), quantile)
    steps, verdict = _run(st, strategy)
    cond = _condition(params, arms["E"].n, arms["R"].n, arms["P"].n)
    return DecisionTrace(tuple(steps), verdict, strategy, cond.holds)


def divergence_check(
    summaries: Iterable[ArmSummary],
    params: DesignParams,
    rule: FilterRule,
    sigma_source="pooled",
    quantile: str = "normal",
) -> DivergenceReport:
    """Whether the data fall where the two strategies reach different verdicts:
    filter failed, delta-superiority shown, non-inferiority not shown."""
    arms = arms_by_label(summaries)
    st = _statistics(arms, params, rule, _coerce_source(sigma_source), quantile)
    in_event = st.diff_rp < st.tau and st.t_delta >= st.crit_ep and st.t_ni < st.crit_er
    _, formal = _run(st, StrategyKind.FORMAL)
    _, intuitive = _run(st, StrategyKind.INTUITIVE)
    return DivergenceReport(
        in_divergence_event=in_event,
        formal=formal,
        intuitive=intuitive,
        condition=_condition(params, arms["E"].n, arms["R"].n, arms["P"].n),
    )
