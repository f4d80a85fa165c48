"""Planning and analysis of single-stage three-arm non-inferiority trials with a
data-driven choice between non-inferiority and delta-superiority."""

__version__ = "0.1.0"

from .design import (
    DesignParams,
    FilterKind,
    FilterRule,
    MixturePrior,
    SampleSizes,
    Scenario,
    StrategyKind,
    derive_margins,
    filter_threshold,
)
from .errors import (
    ConfigError,
    InfeasibleError,
    InputError,
    NumericDomainError,
    ParameterDomainError,
    ThreeArmError,
)
from .gaussian import Rect3, TrivariateNormal, rect_prob, rect_prob_qmc, std_normal_cdf, std_normal_quantile
from .power import equivalence_condition, joint_law, mixture_success, power_breakdown, statistic_correlations
from .optimize import OptimizationProblem, OptimizationResult, cross_scenario_table, optimize, sweep_prior
from .analysis import ArmSummary, DecisionTrace, Verdict, decide, divergence_check, pairwise_ci
from .simulate import SimConfig, SimReport, fwer_scan, simulate

__all__ = [name for name in dir() if not name.startswith("_")]
