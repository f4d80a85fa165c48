"""JSON run configurations: strict parsing into domain objects.

Every configuration is a single JSON object. Unknown keys are rejected so a
misspelt margin name fails loudly instead of falling back to a default.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .design import (
    DesignParams,
    FilterKind,
    FilterRule,
    MixturePrior,
    SampleSizes,
    Scenario,
    StrategyKind,
)
from .errors import ConfigError, ParameterDomainError

_COMMON = {"design", "filter", "strategy", "tol", "description"}
ALLOWED = {
    "power": _COMMON | {"sizes", "sizes_list", "scenarios", "effect_E"},
    "optimize": _COMMON | {"prior", "effect_E", "target", "w_P", "bounds", "dropout_factor"},
    "sweep": _COMMON | {"p_grid", "effect_E", "target", "w_P", "bounds", "dropout_factor"},
    "analyze": _COMMON | {"data", "level", "sigma_source", "quantile", "digits"},
    "check-condition": _COMMON | {"sizes", "sizes_list"},
    "simulate": _COMMON | {"sizes", "scenarios", "effect_E", "replicates", "seed"},
}
_DESIGN_KEYS = {"sigma", "alpha", "rho", "delta_N", "delta"}
_SCENARIO_KEYS = {"name", "v", "effect_E", "mu_E", "mu_R", "mu_P"}
_FILTER_NAMES = {kind.value: kind for kind in FilterKind if kind is not FilterKind.CUSTOM}


def load(path) -> Tuple[Dict[str, Any], Path]:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return raw, path.parent


def check_keys(obj: Mapping, allowed, where: str):
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise ConfigError(f"missing required field '{where}.{key}'" if where else f"missing required field '{key}'")
    return obj[key]


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{field}' must be a number, got {value!r}")
    return float(value)


def _wrap(field: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ParameterDomainError as exc:
        raise ConfigError(f"field '{field}': {exc}") from None


def design(cfg: Mapping) -> DesignParams:
    d = _require(cfg, "design", "")
    if not isinstance(d, dict):
        raise ConfigError("field 'design' must be an object")
    check_keys(d, _DESIGN_KEYS, "design")
    kwargs = {k: _number(_require(d, k, "design"), f"design.{k}") for k in ("sigma", "alpha", "rho", "delta_N")}
    if "delta" in d:
        kwargs["delta"] = _number(d["delta"], "design.delta")
    return _wrap("design", DesignParams, **kwargs)


def filter_rule(cfg: Mapping) -> FilterRule:
    raw = cfg.get("filter", 1)
    if isinstance(raw, bool):
        raise ConfigError("field 'filter' must be 1-4, a filter name or {\"custom\": tau}")
    if isinstance(raw, int):
        return _wrap("filter", FilterRule.numbered, raw)
    if isinstance(raw, str):
        name = raw.strip().lower()
        if name.startswith("filter") and name[6:].isdigit():
            return _wrap("filter", FilterRule.numbered, int(name[6:]))
        if name in _FILTER_NAMES:
            return FilterRule(_FILTER_NAMES[name])
    if isinstance(raw, dict):
        check_keys(raw, {"custom"}, "filter")
        return _wrap("filter", FilterRule.custom, _number(_require(raw, "custom", "filter"), "filter.custom"))
    raise ConfigError(f"field 'filter': unrecognised value {raw!r}")


def strategy(cfg: Mapping, default: StrategyKind = StrategyKind.FORMAL) -> StrategyKind:
    raw = cfg.get("strategy", default.value)
    try:
        return StrategyKind(str(raw).lower())
    except ValueError:
        raise ConfigError(f"field 'strategy' must be 'formal' or 'intuitive', got {raw!r}") from None


def _sizes(value, field: str, w_P: float = 1.0) -> SampleSizes:
    if isinstance(value, dict):
        check_keys(value, {"n_E", "n_R", "n_P"}, field)
        value = [_require(value, k, field) for k in ("n_E", "n_R", "n_P")]
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"field '{field}' must be [n_E, n_R, n_P]")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"field '{field}' must hold integers, got {v!r}")
    return _wrap(field, SampleSizes, *value, w_P=w_P)


def sizes_list(cfg: Mapping, allow_list: bool = True) -> List[SampleSizes]:
    if "sizes" in cfg and "sizes_list" in cfg:
        raise ConfigError("give either 'sizes' or 'sizes_list', not both")
    if "sizes" in cfg:
        return [_sizes(cfg["sizes"], "sizes")]
    if allow_list and "sizes_list" in cfg:
        raw = cfg["sizes_list"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError("field 'sizes_list' must be a non-empty list")
        return [_sizes(v, f"sizes_list[{i}]") for i, v in enumerate(raw)]
    raise ConfigError("missing required field 'sizes'")


def scenarios(cfg: Mapping, params: DesignParams) -> List[Tuple[str, Scenario]]:
    raw = _require(cfg, "scenarios", "")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("field 'scenarios' must be a non-empty list")
    out = []
    for i, sc in enumerate(raw):
        where = f"scenarios[{i}]"
        if not isinstance(sc, dict):
            raise ConfigError(f"field '{where}' must be an object")
        check_keys(sc, _SCENARIO_KEYS, where)
        name = str(sc.get("name", f"scenario{i + 1}"))
        if "v" in sc:
            if any(k in sc for k in ("mu_E", "mu_R", "mu_P")):
                raise ConfigError(f"field '{where}': give either v or explicit means")
            eff = sc.get("effect_E", cfg.get("effect_E"))
            if eff is None:
                raise ConfigError(f"field '{where}': v-scenarios need effect_E")
            scenario = Scenario.from_ratio(params, _number(eff, f"{where}.effect_E"), _number(sc["v"], f"{where}.v"))
        else:
            means = [_number(_require(sc, k, where), f"{where}.{k}") for k in ("mu_E", "mu_R", "mu_P")]
            scenario = _wrap(where, Scenario, *means)
        out.append((name, scenario))
    return out


def prior(cfg: Mapping) -> MixturePrior:
    raw = _require(cfg, "prior", "")
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError("field 'prior' must be one of {\"three_point\": p}, {\"point\": v}, {\"atoms\": [[v, w], ...]}")
    check_keys(raw, {"three_point", "point", "atoms"}, "prior")
    (kind, value), = raw.items()
    if kind == "three_point":
        return _wrap("prior.three_point", MixturePrior.three_point, _number(value, "prior.three_point"))
    if kind == "point":
        return _wrap("prior.point", MixturePrior.point, _number(value, "prior.point"))
    if not isinstance(value, list) or not all(isinstance(a, list) and len(a) == 2 for a in value):
        raise ConfigError("field 'prior.atoms' must be a list of [v, weight] pairs")
    return _wrap("prior.atoms", MixturePrior.from_pairs, value)


def p_grid(cfg: Mapping) -> List[float]:
    raw = _require(cfg, "p_grid", "")
    if isinstance(raw, list):
        if not raw:
            raise ConfigError("field 'p_grid' must not be empty")
        return [_number(p, "p_grid") for p in raw]
    if isinstance(raw, dict):
        check_keys(raw, {"start", "stop", "step"}, "p_grid")
        start, stop, step = (_number(_require(raw, k, "p_grid"), f"p_grid.{k}") for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ConfigError("field 'p_grid' needs step > 0 and stop >= start")
        n = int(round((stop - start) / step)) + 1
        return [round(float(v), 12) for v in np.linspace(start, start + (n - 1) * step, n)]
    raise ConfigError("field 'p_grid' must be a list or {start, stop, step}")


def number(cfg: Mapping, key: str, default: Optional[float]) -> Optional[float]:
    if key not in cfg:
        return default
    return _number(cfg[key], key)


def integer(cfg: Mapping, key: str, default: Optional[int]) -> Optional[int]:
    if key not in cfg:
        return default
    v = cfg[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"field '{key}' must be an integer, got {v!r}")
    return v


def choice(cfg: Mapping, key: str, options, default: str) -> str:
    v = cfg.get(key, default)
    if v not in options:
        raise ConfigError(f"field '{key}' must be one of {sorted(options)}, got {v!r}")
    return v


def bounds(cfg: Mapping) -> Tuple[int, int]:
    raw = cfg.get("bounds", [2, 20000])
    if (
        not isinstance(raw, list) or len(raw) != 2
        or any(isinstance(b, bool) or not isinstance(b, int) for b in raw)
    ):
        raise ConfigError("field 'bounds' must be [min, max] integers")
    return int(raw[0]), int(raw[1])
