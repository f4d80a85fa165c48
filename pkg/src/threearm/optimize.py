"""Cost-optimal integer sample sizes for a target prior-weighted success probability.

The search has two phases. First a continuous relaxation over the allocation
ratios ``n_R / n_E`` and ``n_P / n_E``: for fixed ratios the smallest scale
reaching the target is found by root finding on ``log n_E``, and the cost
``n_E + n_R + w_P * n_P`` is minimised by a coarse grid followed by nested
bounded 1-D searches. Second, integer polishing: for every ``(n_R, n_P)`` in a
+-2 box around the relaxed optimum the minimal feasible integer ``n_E`` is
found exactly (success is increasing in ``n_E``), and the box is re-centred
until the best point is interior.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .design import (
    DesignParams,
    FilterRule,
    MixturePrior,
    SampleSizes,
    Scenario,
    StrategyKind,
)
from .errors import InfeasibleError, ParameterDomainError
from .gaussian import DEFAULT_TOL
from .power import AtomResult, _condition, _mixture, power_breakdown

VERIFY_TOL = 1e-8
_GRID = np.log(np.geomspace(0.05, 4.0, 12))
_BOX = 2
_MAX_RECENTRE = 50


@dataclass(frozen=True)
class OptimizationProblem:
    params: DesignParams
    prior: MixturePrior
    effect_E: float
    rule: FilterRule
    strategy: StrategyKind = StrategyKind.FORMAL
    target: float = 0.9
    w_P: float = 1.0
    bounds: Tuple[int, int] = (2, 20000)

    def __post_init__(self):
        if not 0.0 < self.target < 1.0:
            raise ParameterDomainError(f"target must lie in (0, 1), got {self.target}")
        if not self.w_P >= 1.0:
            raise ParameterDomainError(f"w_P must be >= 1, got {self.w_P}")
        lo, hi = self.bounds
        if int(lo) != lo or int(hi) != hi or lo < 2 or hi < lo:
            raise ParameterDomainError(f"bounds must be integers with 2 <= min <= max, got {self.bounds}")
        object.__setattr__(self, "bounds", (int(lo), int(hi)))


@dataclass(frozen=True)
class TraceEntry:
    phase: str
    n_E: float
    n_R: float
    n_P: float
    success: float


@dataclass
class OptimizationResult:
    sizes: SampleSizes
    cost: float
    n_planned: int
    n_recruited: int
    achieved: float
    atoms: Tuple[AtomResult, ...]
    condition_holds: bool
    trace: List[TraceEntry] = field(default_factory=list, repr=False)

    def recruited_at(self, w: float) -> int:
        """Recruitment needed if the placebo inflation factor were ``w``."""
        return self.sizes.n_E + self.sizes.n_R + math.ceil(w * self.sizes.n_P - 1e-9)


class _Evaluator:
    def __init__(self, problem: OptimizationProblem, tol: float):
        self.problem = problem
        self.tol = tol
        self.trace: List[TraceEntry] = []

    def success(self, n_E, n_R, n_P, phase="relaxed", tol=None):
        pr = self.problem
        mix = _mixture(
            pr.params, (n_E, n_R, n_P), pr.prior, pr.rule, pr.strategy, pr.effect_E,
            self.tol if tol is None else tol,
        )
        self.trace.append(TraceEntry(phase, n_E, n_R, n_P, mix.success))
        return mix


def _cost(problem, n_E, n_R, n_P):
    return n_E + n_R + problem.w_P * n_P


class _Relaxation:
    """Minimal continuous scale for given log allocation ratios."""

    def __init__(self, ev: _Evaluator):
        self.ev = ev
        self.lo, self.hi = ev.problem.bounds
        self.target = ev.problem.target

    def _f(self, t, x, y):
        n_E = math.exp(t)
        return self.ev.success(n_E, n_E * math.exp(x), n_E * math.exp(y)).success - self.target

    def scale(self, x, y) -> float:
        t_lo = math.log(self.lo) - min(0.0, x, y)
        t_hi = math.log(self.hi) - max(0.0, x, y)
        if t_lo > t_hi:
            return math.inf
        f_hi = self._f(t_hi, x, y)
        if f_hi < 0.0:
            return math.inf
        f_lo = self._f(t_lo, x, y)
        if f_lo >= 0.0:
            return t_lo
        return brentq(self._f, t_lo, t_hi, args=(x, y), xtol=1e-5, rtol=1e-10)

    def cost(self, x, y) -> float:
        t = self.scale(x, y)
        if not math.isfinite(t):
            return math.inf
        n_E = math.exp(t)
        return _cost(self.ev.problem, n_E, n_E * math.exp(x), n_E * math.exp(y))


def _relaxed_optimum(ev: _Evaluator):
    rel = _Relaxation(ev)
    grid = np.array([[rel.cost(x, y) for y in _GRID] for x in _GRID])
    if not np.isfinite(grid).any():
        return None
    ix, iy = np.unravel_index(np.argmin(grid), grid.shape)
    step = _GRID[1] - _GRID[0]
    x0, y0 = _GRID[ix], _GRID[iy]
    # widen the bracket at the grid edge so optima outside the grid are reachable
    x_lo = x0 - (3 if ix == 0 else 1) * step
    x_hi = x0 + (3 if ix == len(_GRID) - 1 else 1) * step
    y_lo = y0 - (3 if iy == 0 else 1) * step
    y_hi = y0 + (3 if iy == len(_GRID) - 1 else 1) * step
    best = {"cost": grid[ix, iy], "x": x0, "y": y0}

    def inner(x):
        res = minimize_scalar(
            lambda y: rel.cost(x, y), bounds=(y_lo, y_hi), method="bounded",
            options={"xatol": 1e-3},
        )
        if res.fun < best["cost"]:
            best.update(cost=res.fun, x=x, y=res.x)
        return res.fun

    minimize_scalar(inner, bounds=(x_lo, x_hi), method="bounded", options={"xatol": 1e-3})
    x, y = best["x"], best["y"]
    n_E = math.exp(rel.scale(x, y))
    return n_E, n_E * math.exp(x), n_E * math.exp(y)


def _min_integer_nE(ev: _Evaluator, n_R: int, n_P: int) -> Optional[int]:
    """Smallest integer n_E in bounds with success >= target, or None."""
    lo, hi = ev.problem.bounds
    target = ev.problem.target

    def ok(n_E):
        return ev.success(n_E, n_R, n_P, phase="integer").success >= target

    if not ok(hi):
        return None
    if ok(lo):
        return lo

    def g(t):
        return ev.success(math.exp(t), n_R, n_P).success - target

    t = brentq(g, math.log(lo), math.log(hi), xtol=1e-6)
    cand = min(max(math.ceil(math.exp(t) - 1e-6), lo), hi)
    while cand > lo and ok(cand - 1):
        cand -= 1
    while not ok(cand):
        cand += 1
    return cand


def _rank(problem, triple):
    n_E, n_R, n_P = triple
    return (_cost(problem, n_E, n_R, n_P), n_P, n_E)


def _polish(ev: _Evaluator, start, threads: int):
    problem = ev.problem
    lo, hi = problem.bounds
    c_R = min(max(int(round(start[1])), lo), hi)
    c_P = min(max(int(round(start[2])), lo), hi)
    seen = {}
    best = None
    for _ in range(_MAX_RECENTRE):
        pairs = [
            (r, p)
            for r in range(c_R - _BOX, c_R + _BOX + 1)
            for p in range(c_P - _BOX, c_P + _BOX + 1)
            if lo <= r <= hi and lo <= p <= hi and (r, p) not in seen
        ]
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                found = list(pool.map(lambda rp: _min_integer_nE(ev, *rp), pairs))
        else:
            found = [_min_integer_nE(ev, *rp) for rp in pairs]
        for rp, n_E in zip(pairs, found):
            seen[rp] = n_E
        feasible = [(n_E, r, p) for (r, p), n_E in seen.items() if n_E is not None]
        if not feasible:
            return None
        best = min(feasible, key=lambda t: _rank(problem, t))
        if best[1] == c_R and best[2] == c_P:
            break
        c_R, c_P = best[1], best[2]
    return best


def optimize(
    problem: OptimizationProblem, tol: float = DEFAULT_TOL, threads: int = 1
) -> OptimizationResult:
    """Minimise ``n_E + n_R + w_P * n_P`` subject to success >= target."""
    ev = _Evaluator(problem, tol)
    lo, hi = problem.bounds
    corner = ev.success(hi, hi, hi, phase="corner").success
    if corner < problem.target:
        raise InfeasibleError(
            f"target {problem.target} unattainable within bounds {problem.bounds}; "
            f"success at the bound corner is {corner:.6f}",
            max_attainable=corner,
        )
    start = _relaxed_optimum(ev)
    if start is None:
        start = (hi, hi, hi)
    best = _polish(ev, start, threads)
    if best is None:
        raise InfeasibleError("no feasible integer allocation found", max_attainable=corner)
    n_E, n_R, n_P = best
    # re-verify at the tighter tolerance; step n_E up if integration noise mattered
    mix = ev.success(n_E, n_R, n_P, phase="verify", tol=VERIFY_TOL)
    while mix.success < problem.target and n_E < hi:
        n_E += 1
        mix = ev.success(n_E, n_R, n_P, phase="verify", tol=VERIFY_TOL)
    sizes = SampleSizes(n_E, n_R, n_P, problem.w_P)
    return OptimizationResult(
        sizes=sizes,
        cost=sizes.cost,
        n_planned=sizes.total,
        n_recruited=sizes.recruited,
        achieved=mix.success,
        atoms=mix.atoms,
        condition_holds=_condition(problem.params, n_E, n_R, n_P).holds,
        trace=ev.trace,
    )


@dataclass
class SweepRow:
    p: float
    result: Optional[OptimizationResult]
    error: Optional[str] = None


def sweep_prior(
    template: OptimizationProblem,
    p_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> List[SweepRow]:
    """Optimise once per grid value with the three-point prior of that ``p``."""
    rows = []
    for p in p_grid:
        try:
            prior = MixturePrior.three_point(float(p))
            problem = OptimizationProblem(
                template.params, prior, template.effect_E, template.rule,
                template.strategy, template.target, template.w_P, template.bounds,
            )
            rows.append(SweepRow(float(p), optimize(problem, tol=tol, threads=threads)))
        except (InfeasibleError, ParameterDomainError) as exc:
            rows.append(SweepRow(float(p), None, str(exc)))
    return rows


def cross_scenario_table(
    params: DesignParams,
    sizes_list: Sequence[SampleSizes],
    scenario_list: Sequence[Scenario],
    rule: FilterRule,
    strategy: StrategyKind = StrategyKind.FORMAL,
    tol: float = DEFAULT_TOL,
) -> np.ndarray:
    """Total power with row i's sizes when column j's scenario is true."""
    if not sizes_list or not scenario_list:
        raise ParameterDomainError("sizes_list and scenario_list must be non-empty")
    out = np.empty((len(sizes_list), len(scenario_list)))
    for i, sizes in enumerate(sizes_list):
        for j, scenario in enumerate(scenario_list):
            out[i, j] = power_breakdown(params, sizes, scenario, rule, strategy, tol).total
    return out
