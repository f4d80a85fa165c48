"""Monte Carlo simulation of complete trials from group-mean sufficient statistics.

Every trial is reduced to a 4-bit outcome code (see ``kernels.outcome_codes``);
all reported rates are functions of the 16-bin code histogram.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from . import kernels
from .design import DesignParams, FilterRule, SampleSizes, Scenario, StrategyKind, filter_threshold
from .errors import ParameterDomainError
from .power import _condition

SUP, NI, DSUP, FILT = 1, 2, 4, 8
CHUNK = 1 << 16
_NULL_SLACK = 1e-12

SeedLike = Union[int, Sequence[int]]


def rejections(code: int, strategy: StrategyKind) -> Tuple[bool, bool, bool]:
    """Which of (H_EP^S, H_ER^N, H_EP^delta) the strategy rejects for a trial."""
    a, b, d, f = bool(code & SUP), bool(code & NI), bool(code & DSUP), bool(code & FILT)
    if strategy is StrategyKind.FORMAL:
        return a, a and b, a and b and d
    return a, a and f and b, a and not f and d


def success_path(code: int, strategy: StrategyKind) -> str:
    """'ni', 'delta' or '' (no success) for a trial's outcome code."""
    a, b, d, f = bool(code & SUP), bool(code & NI), bool(code & DSUP), bool(code & FILT)
    if a and b and f:
        return "ni"
    if strategy is StrategyKind.FORMAL:
        return "delta" if a and b and d and not f else ""
    return "delta" if a and d and not f else ""


def _table(fn) -> np.ndarray:
    return np.array([fn(c) for c in range(16)], dtype=bool)


@dataclass(frozen=True)
class SimConfig:
    params: DesignParams
    sizes: SampleSizes
    scenario: Scenario
    rule: FilterRule
    strategy: StrategyKind = StrategyKind.FORMAL
    replicates: int = 100_000
    seed: SeedLike = 0

    def __post_init__(self):
        if isinstance(self.replicates, bool) or int(self.replicates) != self.replicates or self.replicates < 1:
            raise ParameterDomainError(f"replicates must be an integer >= 1, got {self.replicates}")


@dataclass(frozen=True)
class SimReport:
    replicates: int
    strategy: StrategyKind
    histogram: Tuple[int, ...]

    def count(self, mask: np.ndarray) -> int:
        return int(np.asarray(self.histogram)[mask].sum())

    @property
    def counts(self) -> Dict[str, int]:
        s = self.strategy
        masks = {
            "filter": _table(lambda c: bool(c & FILT)),
            "test_sup": _table(lambda c: bool(c & SUP)),
            "test_ni": _table(lambda c: bool(c & NI)),
            "test_delta": _table(lambda c: bool(c & DSUP)),
            "reject_sup": _table(lambda c: rejections(c, s)[0]),
            "reject_ni": _table(lambda c: rejections(c, s)[1]),
            "reject_delta": _table(lambda c: rejections(c, s)[2]),
            "power1": _table(lambda c: success_path(c, s) == "ni"),
            "power2": _table(lambda c: success_path(c, s) == "delta"),
            "success": _table(lambda c: success_path(c, s) != ""),
            "divergence": _table(
                lambda c: bool(success_path(c, StrategyKind.FORMAL))
                != bool(success_path(c, StrategyKind.INTUITIVE))
            ),
        }
        return {k: self.count(m) for k, m in masks.items()}

    @property
    def proportions(self) -> Dict[str, float]:
        return {k: v / self.replicates for k, v in self.counts.items()}

    def stderr(self, name: str) -> float:
        p = self.proportions[name]
        return math.sqrt(p * (1.0 - p) / self.replicates)


def _seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    if isinstance(seed, (int, np.integer)):
        return np.random.SeedSequence(int(seed))
    return np.random.SeedSequence([int(s) for s in seed])


def _draw_means(cfg: SimConfig, child: np.random.SeedSequence, m: int):
    rng = np.random.Generator(np.random.PCG64(child))
    sig = cfg.params.sigma
    sc, sz = cfg.scenario, cfg.sizes
    xe = rng.normal(sc.mu_E, sig / math.sqrt(sz.n_E), m)
    xr = rng.normal(sc.mu_R, sig / math.sqrt(sz.n_R), m)
    xp = rng.normal(sc.mu_P, sig / math.sqrt(sz.n_P), m)
    return xe, xr, xp


def _codes(cfg: SimConfig, xe, xr, xp, backend=None):
    p, sz = cfg.params, cfg.sizes
    sig = p.sigma
    k = backend or kernels
    return k.outcome_codes(
        xe, xr, xp,
        sig * math.sqrt(1 / sz.n_E + 1 / sz.n_P),
        sig * math.sqrt(1 / sz.n_E + 1 / sz.n_R),
        sig * math.sqrt(1 / sz.n_R + 1 / sz.n_P),
        p.z_alpha, p.delta, p.delta_N,
        filter_threshold(cfg.rule, p, sz),
    )


def simulate(config: SimConfig, threads: int = 1) -> SimReport:
    """Simulate ``config.replicates`` trials. Work is split into fixed chunks with
    their own spawned seed, so the report does not depend on ``threads``."""
    n_chunks = -(-config.replicates // CHUNK)
    children = _seed_sequence(config.seed).spawn(n_chunks)
    sizes = [min(CHUNK, config.replicates - i * CHUNK) for i in range(n_chunks)]

    def run(i):
        xe, xr, xp = _draw_means(config, children[i], sizes[i])
        return np.bincount(_codes(config, xe, xr, xp), minlength=16)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            hists = list(pool.map(run, range(n_chunks)))
    else:
        hists = [run(i) for i in range(n_chunks)]
    hist = np.sum(hists, axis=0)
    return SimReport(config.replicates, config.strategy, tuple(int(h) for h in hist))


def true_nulls(params: DesignParams, scenario: Scenario) -> Tuple[bool, bool, bool]:
    diff_ep = scenario.mu_E - scenario.mu_P
    diff_er = scenario.mu_E - scenario.mu_R
    return (
        diff_ep <= _NULL_SLACK,
        diff_er <= -params.delta_N + _NULL_SLACK,
        diff_ep <= params.delta + _NULL_SLACK,
    )


@dataclass(frozen=True)
class FWERRow:
    scenario: Scenario
    true_nulls: Tuple[bool, bool, bool]
    errors: int
    replicates: int

    @property
    def rate(self) -> float:
        return self.errors / self.replicates

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.replicates)


@dataclass(frozen=True)
class FWERScan:
    rows: Tuple[FWERRow, ...]
    strategy: StrategyKind
    condition_holds: bool

    @property
    def worst(self) -> FWERRow:
        return max(self.rows, key=lambda r: r.rate)

    @property
    def max_rate(self) -> float:
        return self.worst.rate


def fwer_scan(
    params: DesignParams,
    sizes: SampleSizes,
    rule: FilterRule,
    strategy: StrategyKind,
    null_grid: Sequence[Scenario],
    replicates: int,
    seed: SeedLike = 0,
    threads: int = 1,
) -> FWERScan:
    """Probability of rejecting at least one true null, per grid scenario."""
    base = list(_seed_sequence(seed).generate_state(1)) if not isinstance(seed, (int, np.integer)) else [int(seed)]
    rows: List[FWERRow] = []
    for k, scenario in enumerate(null_grid):
        cfg = SimConfig(params, sizes, scenario, rule, strategy, replicates, seed=base + [k])
        rep = simulate(cfg, threads=threads)
        nulls = true_nulls(params, scenario)
        mask = _table(lambda c: any(r and t for r, t in zip(rejections(c, strategy), nulls)))
        rows.append(FWERRow(scenario, nulls, rep.count(mask), replicates))
    cond = _condition(params, sizes.n_E, sizes.n_R, sizes.n_P)
    return FWERScan(tuple(rows), strategy, cond.holds)
