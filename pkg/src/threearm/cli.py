"""Command-line front end.

Examples::

    threearm power --config configs/table2.json --out out/table2
    threearm optimize --config configs/table1_sc1_f1.json
    threearm analyze --data configs/higuchi.csv --config configs/example_higuchi.json
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__, config as cfgmod, kernels
from .analysis import decide, divergence_check, pairwise_ci
from .design import MixturePrior, Scenario, StrategyKind
from .errors import ConfigError, InfeasibleError, InputError, NumericDomainError, ParameterDomainError
from .gaussian import DEFAULT_TOL
from .ingest import read_summaries
from .optimize import OptimizationProblem, optimize, sweep_prior
from .power import equivalence_condition, power_breakdown
from .simulate import SimConfig, simulate

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


def pct(x: float) -> str:
    """Percentage with half-up rounding at 0.1 points."""
    return str((Decimal(repr(float(x))) * 100).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)) + "%"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else str(v)


@dataclass
class Table:
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def records(self) -> List[Dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]


@dataclass
class Outcome:
    tables: Dict[str, Table]
    text: str
    resolved: Dict[str, Any]
    exit_code: int = EXIT_OK


def _tol(cfg, args) -> float:
    if args.tol is not None:
        return args.tol
    return cfgmod.number(cfg, "tol", DEFAULT_TOL)


def _design_dict(params):
    return {
        "sigma": params.sigma, "alpha": params.alpha, "rho": params.rho,
        "delta_N": params.delta_N, "delta": params.delta,
        "historical_effect": params.historical_effect,
    }


def _scenario_dict(name, sc):
    return {"name": name, "mu_E": sc.mu_E, "mu_R": sc.mu_R, "mu_P": sc.mu_P}


def cmd_power(cfg, args, base) -> Outcome:
    cfgmod.check_keys(cfg, cfgmod.ALLOWED["power"], "config")
    params = cfgmod.design(cfg)
    rule = cfgmod.filter_rule(cfg)
    strategy = cfgmod.strategy(cfg)
    sizes_list = cfgmod.sizes_list(cfg)
    scenarios = cfgmod.scenarios(cfg, params)
    tol = _tol(cfg, args)
    table = Table(["sizes_index", "n_E", "n_R", "n_P", "scenario", "mu_E", "mu_R", "mu_P",
                   "p_filter", "power1", "power2", "total"])
    lines = [f"power ({rule.label}, {strategy.value})"]
    matrix = []
    for i, sizes in enumerate(sizes_list):
        lines.append(f"sizes n_E={sizes.n_E} n_R={sizes.n_R} n_P={sizes.n_P}")
        lines.append(f"  {'scenario':<14}{'filter':>9}{'power1':>9}{'power2':>9}{'total':>9}")
        row_tot = []
        for name, sc in scenarios:
            bd = power_breakdown(params, sizes, sc, rule, strategy, tol)
            table.rows.append([i, sizes.n_E, sizes.n_R, sizes.n_P, name, sc.mu_E, sc.mu_R, sc.mu_P,
                               bd.p_filter, bd.power1, bd.power2, bd.total])
            lines.append(f"  {name:<14}{pct(bd.p_filter):>9}{pct(bd.power1):>9}{pct(bd.power2):>9}{pct(bd.total):>9}")
            row_tot.append(bd.total)
        matrix.append(row_tot)
    if len(sizes_list) > 1:
        lines.append("total power: rows = sizes, columns = true scenario")
        lines.append("  " + "".join(f"{n:>12}" for n, _ in scenarios))
        for i, r in enumerate(matrix):
            lines.append(f"  {i:<2}" + "".join(f"{pct(v):>12}" for v in r)[2:])
    resolved = {
        "design": _design_dict(params), "filter": rule.label, "strategy": strategy.value,
        "sizes_list": [s.as_tuple() for s in sizes_list],
        "scenarios": [_scenario_dict(n, s) for n, s in scenarios], "tol": tol,
    }
    return Outcome({"power": table}, "\n".join(lines), resolved)


def _problem(cfg, prior):
    params = cfgmod.design(cfg)
    eff = cfgmod.number(cfg, "effect_E", None)
    if eff is None:
        raise ConfigError("missing required field 'effect_E'")
    try:
        return OptimizationProblem(
            params=params,
            prior=prior,
            effect_E=eff,
            rule=cfgmod.filter_rule(cfg),
            strategy=cfgmod.strategy(cfg),
            target=cfgmod.number(cfg, "target", 0.9),
            w_P=cfgmod.number(cfg, "w_P", 1.0),
            bounds=cfgmod.bounds(cfg),
        )
    except ParameterDomainError as exc:
        raise ConfigError(str(exc)) from None


def _problem_dict(pr, dropout):
    return {
        "design": _design_dict(pr.params), "filter": pr.rule.label, "strategy": pr.strategy.value,
        "effect_E": pr.effect_E, "target": pr.target, "w_P": pr.w_P,
        "dropout_factor": dropout, "bounds": list(pr.bounds),
    }


def _atom_col(v: float) -> str:
    return "S_v" + f"{v:g}".replace(".", "")


def cmd_optimize(cfg, args, base) -> Outcome:
    cfgmod.check_keys(cfg, cfgmod.ALLOWED["optimize"], "config")
    prior = cfgmod.prior(cfg)
    pr = _problem(cfg, prior)
    dropout = cfgmod.number(cfg, "dropout_factor", pr.w_P)
    tol = _tol(cfg, args)
    resolved = _problem_dict(pr, dropout) | {"prior": [list(a) for a in prior.atoms], "tol": tol}
    res = optimize(pr, tol=tol, threads=args.threads)
    s = res.sizes
    recruited = res.recruited_at(dropout)
    cols = ["n_E", "n_R", "n_P", "w_P", "cost", "n_planned", "n_recruited", "achieved", "condition_holds"]
    row = [s.n_E, s.n_R, s.n_P, s.w_P, res.cost, res.n_planned, recruited, res.achieved, res.condition_holds]
    for a in res.atoms:
        cols.append(_atom_col(a.v))
        row.append(a.breakdown.total)
    trace = Table(["phase", "n_E", "n_R", "n_P", "success"],
                  [[t.phase, t.n_E, t.n_R, t.n_P, t.success] for t in res.trace])
    lines = [
        f"optimal sizes ({pr.rule.label}, {pr.strategy.value}, target {pr.target}, w_P={pr.w_P:g})",
        f"  n_E={s.n_E} n_R={s.n_R} n_P={s.n_P}",
        f"  N planned={res.n_planned}  N recruited={recruited}  cost={res.cost:g}",
        f"  achieved success={pct(res.achieved)} ({res.achieved:.6f})",
    ]
    lines += [f"  power at v={a.v:g} (weight {a.weight:g}): {pct(a.breakdown.total)}" for a in res.atoms]
    lines.append(f"  equivalence condition holds: {res.condition_holds}")
    return Outcome({"optimize": Table(cols, [row]), "optimize_trace": trace}, "\n".join(lines), resolved)


SWEEP_COLUMNS = ["p", "n_E", "n_R", "n_P", "N", "S_v1", "S_v075", "S_v05",
                 "cost", "n_recruited", "achieved", "condition_holds", "error"]


def cmd_sweep(cfg, args, base) -> Outcome:
    cfgmod.check_keys(cfg, cfgmod.ALLOWED["sweep"], "config")
    grid = cfgmod.p_grid(cfg)
    template = _problem(cfg, MixturePrior.point(1.0))
    dropout = cfgmod.number(cfg, "dropout_factor", template.w_P)
    tol = _tol(cfg, args)
    resolved = _problem_dict(template, dropout) | {"p_grid": grid, "tol": tol}
    table = Table(list(SWEEP_COLUMNS))
    lines = [f"{'p':>6}{'n_E':>7}{'n_R':>7}{'n_P':>7}{'N':>7}{'S(v=1)':>9}{'S(3/4)':>9}{'S(1/2)':>9}"]
    params = template.params
    for row in sweep_prior(template, grid, tol=tol, threads=args.threads):
        if row.result is None:
            table.rows.append([row.p] + [None] * 11 + [row.error])
            lines.append(f"{row.p:>6.3g}  failed: {row.error}")
            continue
        r = row.result
        # every row reports power at all three ratios, also where p puts no mass there
        per_v = []
        for v in (1.0, 0.75, 0.5):
            per_v.append(power_breakdown(params, r.sizes, Scenario.from_ratio(params, template.effect_E, v),
                                         template.rule, template.strategy, tol).total)
        s = r.sizes
        table.rows.append([row.p, s.n_E, s.n_R, s.n_P, r.n_planned, *per_v, r.cost,
                           r.recruited_at(dropout), r.achieved, r.condition_holds, None])
        lines.append(f"{row.p:>6.3g}{s.n_E:>7}{s.n_R:>7}{s.n_P:>7}{r.n_planned:>7}"
                     + "".join(f"{pct(v):>9}" for v in per_v))
    return Outcome({"sweep": table}, "\n".join(lines), resolved)


def cmd_analyze(cfg, args, base) -> Outcome:
    cfgmod.check_keys(cfg, cfgmod.ALLOWED["analyze"], "config")
    params = cfgmod.design(cfg)
    rule = cfgmod.filter_rule(cfg)
    strategy = cfgmod.strategy(cfg, StrategyKind.INTUITIVE)
    level = cfgmod.number(cfg, "level", 0.95)
    source = cfgmod.choice(cfg, "sigma_source", {"pooled", "known"}, "pooled")
    quantile = cfgmod.choice(cfg, "quantile", {"normal", "t"}, "normal")
    digits = cfgmod.integer(cfg, "digits", 2)
    if args.data is not None:
        data_path = Path(args.data)
    elif "data" in cfg:
        data_path = base / str(cfg["data"])
    else:
        raise ConfigError("no data file: pass --data or set 'data' in the config")
    summaries = read_summaries(data_path)
    arms = {s.label: s for s in summaries}
    trace = decide(summaries, params, rule, strategy, source, quantile)
    div = divergence_check(summaries, params, rule, source, quantile)
    steps = Table(["order", "step", "statistic", "critical", "outcome"],
                  [[i + 1, st.name, st.statistic, st.critical, st.outcome] for i, st in enumerate(trace.steps)])
    ci = Table(["comparison", "difference", "lower", "upper", "level"])
    lines = [f"analysis of {data_path.name} ({rule.label}, {strategy.value}, sd: {source}, {quantile} quantiles)"]
    for st in trace.steps:
        verb = "rejected" if st.outcome else "not rejected"
        if st.name == "filter":
            verb = "satisfied" if st.outcome else "not satisfied"
        lines.append(f"  {st.name:<11} statistic={st.statistic:.4f}  critical={st.critical:.4f}  {verb}")
    lines.append(f"  verdict: {trace.verdict.value}")
    lines.append(f"  {level:.0%} confidence intervals:")
    for a, b in (("E", "P"), ("E", "R"), ("R", "P")):
        lo, hi = pairwise_ci(arms[a], arms[b], level, source, params.sigma, quantile)
        ci.rows.append([f"{a}-{b}", arms[a].mean - arms[b].mean, lo, hi, level])
        lines.append(f"    {a}-{b}: ({lo:.{digits}f}, {hi:.{digits}f})")
    cond = div.condition
    lines.append(f"  equivalence condition holds: {cond.holds} (lhs={cond.lhs:.5f}, rhs={cond.rhs:.5f})")
    lines.append(f"  in divergence event: {div.in_divergence_event}; formal verdict {div.formal.value}, "
                 f"intuitive verdict {div.intuitive.value}")
    result = Table(
        ["verdict", "strategy", "condition_holds", "condition_lhs", "condition_rhs",
         "in_divergence_event", "formal_verdict", "intuitive_verdict"],
        [[trace.verdict.value, strategy.value, cond.holds, cond.lhs, cond.rhs,
          div.in_divergence_event, div.formal.value, div.intuitive.value]],
    )
    summ = Table(["arm", "n", "mean", "sd"], [[s.label, s.n, s.mean, s.sd] for s in summaries])
    resolved = {"design": _design_dict(params), "filter": rule.label, "strategy": strategy.value,
                "level": level, "sigma_source": source, "quantile": quantile, "data": str(data_path)}
    return Outcome({"analyze_steps": steps, "analyze_ci": ci, "analyze_result": result,
                    "analyze_summaries": summ}, "\n".join(lines), resolved)


def cmd_check_condition(cfg, args, base) -> Outcome:
    cfgmod.check_keys(cfg, cfgmod.ALLOWED["check-condition"], "config")
    params = cfgmod.design(cfg)
    table = Table(["n_E", "n_R", "n_P", "lhs", "rhs", "slack", "holds"])
    lines = []
    for s in cfgmod.sizes_list(cfg):
        c = equivalence_condition(params, s)
        table.rows.append([s.n_E, s.n_R, s.n_P, c.lhs, c.rhs, c.slack, c.holds])
        lines.append(f"n=({s.n_E}, {s.n_R}, {s.n_P}): lhs={c.lhs:.5f} rhs={c.rhs:.5f} "
                     f"slack={c.slack:.5f} -> {'holds' if c.holds else 'violated'}")
    resolved = {"design": _design_dict(params), "sizes_list": [r[:3] for r in table.rows]}
    return Outcome({"condition": table}, "\n".join(lines), resolved)


_SIM_FIELDS = ["filter", "test_sup", "test_ni", "test_delta", "reject_sup", "reject_ni", "reject_delta",
               "power1", "power2", "success", "divergence"]


def cmd_simulate(cfg, args, base) -> Outcome:
    cfgmod.check_keys(cfg, cfgmod.ALLOWED["simulate"], "config")
    params = cfgmod.design(cfg)
    rule = cfgmod.filter_rule(cfg)
    strategy = cfgmod.strategy(cfg)
    sizes = cfgmod.sizes_list(cfg, allow_list=False)[0]
    scenarios = cfgmod.scenarios(cfg, params)
    reps = cfgmod.integer(cfg, "replicates", 100_000)
    seed = args.seed if args.seed is not None else cfgmod.integer(cfg, "seed", 0)
    cols = ["scenario", "replicates", "seed"]
    for f in _SIM_FIELDS:
        cols += [f"{f}_count", f"{f}_prop", f"{f}_se"]
    table = Table(cols)
    lines = [f"simulation ({rule.label}, {strategy.value}), n=({sizes.n_E}, {sizes.n_R}, {sizes.n_P}), "
             f"{reps} replicates, seed {seed}"]
    for k, (name, sc) in enumerate(scenarios):
        try:
            sim_cfg = SimConfig(params, sizes, sc, rule, strategy, reps, seed=[seed, k])
        except ParameterDomainError as exc:
            raise ConfigError(str(exc)) from None
        rep = simulate(sim_cfg, threads=args.threads)
        counts, props = rep.counts, rep.proportions
        row = [name, reps, seed]
        for f in _SIM_FIELDS:
            row += [counts[f], props[f], rep.stderr(f)]
        table.rows.append(row)
        lines.append(f"  {name}: filter {pct(props['filter'])}, power1 {pct(props['power1'])}, "
                     f"power2 {pct(props['power2'])}, success {pct(props['success'])} "
                     f"(se {rep.stderr('success'):.5f}), divergences {counts['divergence']}")
    resolved = {"design": _design_dict(params), "filter": rule.label, "strategy": strategy.value,
                "sizes": sizes.as_tuple(), "scenarios": [_scenario_dict(n, s) for n, s in scenarios],
                "replicates": reps, "seed": seed}
    return Outcome({"simulate": table}, "\n".join(lines), resolved)


COMMANDS = {
    "power": cmd_power,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
    "check-condition": cmd_check_condition,
    "simulate": cmd_simulate,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_outputs(outcome: Outcome, out_dir: Path, fmt: str, manifest: Dict[str, Any]) -> Dict[str, str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    if fmt == "json":
        path = out_dir / f"{manifest['command'].replace('-', '_')}.json"
        payload = {name: t.records() for name, t in outcome.tables.items()}
        path.write_text(json.dumps(payload, indent=2, default=_fmt) + "\n", encoding="utf-8")
        written[path.name] = _sha256(path)
    else:
        for name, table in outcome.tables.items():
            path = out_dir / f"{name}.csv"
            path.write_text(table.csv_text(), encoding="utf-8")
            written[path.name] = _sha256(path)
    manifest["outputs"] = written
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="threearm", description="Plan and analyse adaptive three-arm non-inferiority trials.")
    ap.add_argument("--version", action="version", version=f"threearm {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", default=None, help="output directory (default: out/<command>)")
        p.add_argument("--seed", type=int, default=None, help="random seed (simulate)")
        p.add_argument("--tol", type=float, default=None, help="integrator tolerance")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "analyze":
            p.add_argument("--data", default=None, help="CSV with arm,n,mean,sd or arm,value")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.time()
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.tol is not None and not args.tol >= 1e-10:
            raise ConfigError("--tol must be >= 1e-10")
        cfg, base = cfgmod.load(args.config)
        outcome = COMMANDS[args.command](cfg, args, base)
        out_dir = Path(args.out) if args.out else Path("out") / args.command
        manifest = {
            "tool": "threearm",
            "version": __version__,
            "backend": kernels.BACKEND,
            "command": args.command,
            "config_path": str(args.config),
            "config": outcome.resolved,
            "seed": args.seed if args.seed is not None else cfg.get("seed"),
            "tol": outcome.resolved.get("tol", args.tol),
            "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
            "wall_clock_seconds": None,
        }
        manifest["wall_clock_seconds"] = round(time.time() - started, 3)
        write_outputs(outcome, out_dir, args.format, manifest)
        print(outcome.text)
        print(f"wrote {out_dir}")
        return outcome.exit_code
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc} (max attainable {exc.max_attainable:.6f})", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericDomainError, ParameterDomainError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
