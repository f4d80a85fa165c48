"""Design-level value types for three-arm (E, R, P) non-inferiority trials.

All quantities are in outcome units. The delta-superiority margin is derived
from the non-inferiority margin and the preserved fraction ``rho`` unless it
is overridden explicitly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from scipy.special import ndtri

from .errors import ParameterDomainError

_REL_TOL = 1e-12


def derive_margins(rho: float, delta_N: float) -> Tuple[float, float]:
    """Return ``(delta, historical_effect)`` for a margin ``delta_N`` equal to
    the fraction ``rho`` of the historical reference-over-placebo effect."""
    if not 0.0 < rho <= 1.0:
        raise ParameterDomainError(f"rho must lie in (0, 1], got {rho}")
    if not delta_N >= 0.0:
        raise ParameterDomainError(f"delta_N must be >= 0, got {delta_N}")
    historical = delta_N / rho
    return (1.0 - rho) * historical, historical


@dataclass(frozen=True)
class DesignParams:
    sigma: float
    alpha: float
    rho: float
    delta_N: float
    delta: Optional[float] = None
    historical_effect: float = field(init=False)
    delta_overridden: bool = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterDomainError(f"sigma must be a positive number, got {self.sigma}")
        if not 0.0 < self.alpha < 0.5:
            raise ParameterDomainError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        derived, historical = derive_margins(self.rho, self.delta_N)
        object.__setattr__(self, "historical_effect", historical)
        if self.delta is None:
            object.__setattr__(self, "delta", derived)
            object.__setattr__(self, "delta_overridden", False)
        else:
            if not self.delta >= 0.0:
                raise ParameterDomainError(f"delta must be >= 0, got {self.delta}")
            same = math.isclose(self.delta, derived, rel_tol=_REL_TOL, abs_tol=_REL_TOL)
            object.__setattr__(self, "delta", float(self.delta))
            object.__setattr__(self, "delta_overridden", not same)

    @property
    def z_alpha(self) -> float:
        return float(-ndtri(self.alpha))


@dataclass(frozen=True)
class Scenario:
    mu_E: float
    mu_R: float
    mu_P: float

    def __post_init__(self):
        for name in ("mu_E", "mu_R", "mu_P"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterDomainError(f"{name} must be finite")

    @classmethod
    def from_ratio(cls, params: DesignParams, effect_E: float, v: float) -> "Scenario":
        """Placebo at 0, E at ``effect_E``, R at ``v`` times the historical effect."""
        return cls(mu_E=effect_E, mu_R=v * params.historical_effect, mu_P=0.0)


class FilterKind(enum.Enum):
    SUPERIORITY = "superiority"
    DELTA_SUPERIORITY = "delta_superiority"
    FULL_HISTORICAL = "full_historical"
    THREE_QUARTER_HISTORICAL = "three_quarter_historical"
    CUSTOM = "custom"


_FILTER_NUMBERS = {
    1: FilterKind.SUPERIORITY,
    2: FilterKind.DELTA_SUPERIORITY,
    3: FilterKind.FULL_HISTORICAL,
    4: FilterKind.THREE_QUARTER_HISTORICAL,
}


@dataclass(frozen=True)
class FilterRule:
    """Reference-strength rule, always of the form ``X_R - X_P >= tau``."""

    kind: FilterKind
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.kind is FilterKind.CUSTOM:
            if self.threshold is None or not math.isfinite(self.threshold):
                raise ParameterDomainError("custom filter needs a finite threshold")
        elif self.threshold is not None:
            raise ParameterDomainError("only custom filters carry a threshold")

    @classmethod
    def numbered(cls, number: int) -> "FilterRule":
        try:
            return cls(_FILTER_NUMBERS[number])
        except KeyError:
            raise ParameterDomainError(f"filter number must be 1-4, got {number}") from None

    @classmethod
    def custom(cls, threshold: float) -> "FilterRule":
        return cls(FilterKind.CUSTOM, float(threshold))

    @property
    def label(self) -> str:
        for number, kind in _FILTER_NUMBERS.items():
            if kind is self.kind:
                return f"filter{number}"
        return f"custom({self.threshold:g})"


class StrategyKind(enum.Enum):
    FORMAL = "formal"
    INTUITIVE = "intuitive"


@dataclass(frozen=True)
class SampleSizes:
    n_E: int
    n_R: int
    n_P: int
    w_P: float = 1.0

    def __post_init__(self):
        for name in ("n_E", "n_R", "n_P"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 2:
                raise ParameterDomainError(f"{name} must be an integer >= 2, got {value}")
            object.__setattr__(self, name, int(value))
        if not self.w_P >= 1.0:
            raise ParameterDomainError(f"w_P must be >= 1, got {self.w_P}")

    @property
    def total(self) -> int:
        return self.n_E + self.n_R + self.n_P

    @property
    def recruited(self) -> int:
        return self.n_E + self.n_R + math.ceil(self.w_P * self.n_P - 1e-9)

    @property
    def cost(self) -> float:
        return self.n_E + self.n_R + self.w_P * self.n_P

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.n_E, self.n_R, self.n_P)


@dataclass(frozen=True)
class MixturePrior:
    """Finite prior on the effect ratio v = in-trial / historical reference effect."""

    atoms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(v), float(w)) for v, w in self.atoms)
        if not atoms:
            raise ParameterDomainError("prior needs at least one atom")
        vs = [v for v, _ in atoms]
        if any(not 0.0 <= v <= 1.0 for v in vs):
            raise ParameterDomainError("effect ratios must lie in [0, 1]")
        if len(set(vs)) != len(vs):
            raise ParameterDomainError("effect ratios must be distinct")
        if any(w < 0.0 for _, w in atoms):
            raise ParameterDomainError("prior weights must be >= 0")
        if abs(sum(w for _, w in atoms) - 1.0) > 1e-9:
            raise ParameterDomainError("prior weights must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def point(cls, v: float = 1.0) -> "MixturePrior":
        return cls(((v, 1.0),))

    @classmethod
    def three_point(cls, p: float) -> "MixturePrior":
        """Mass ``p`` at v = 1 and ``(1 - p) / 2`` each at v = 3/4 and v = 1/2."""
        if not 0.0 <= p <= 1.0:
            raise ParameterDomainError(f"p must lie in [0, 1], got {p}")
        rest = (1.0 - p) / 2.0
        atoms = [(1.0, p), (0.75, rest), (0.5, rest)]
        return cls(tuple((v, w) for v, w in atoms if w > 0.0))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "MixturePrior":
        return cls(tuple((float(v), float(w)) for v, w in pairs))


def _threshold(rule: FilterRule, params: DesignParams, n_R: float, n_P: float) -> float:
    kind = rule.kind
    if kind is FilterKind.SUPERIORITY:
        return params.z_alpha * params.sigma * math.sqrt(1.0 / n_R + 1.0 / n_P)
    if kind is FilterKind.DELTA_SUPERIORITY:
        return params.delta + params.z_alpha * params.sigma * math.sqrt(1.0 / n_R + 1.0 / n_P)
    if kind is FilterKind.CUSTOM:
        return rule.threshold
    if not math.isclose(params.rho, 0.5):
        raise ParameterDomainError(
            f"{rule.label} is defined for rho = 1/2 only; use a custom threshold"
        )
    if kind is FilterKind.FULL_HISTORICAL:
        return 2.0 * params.delta
    return 1.5 * params.delta


def filter_threshold(rule: FilterRule, params: DesignParams, sizes: SampleSizes) -> float:
    """Raw threshold on ``X_R - X_P`` at which the filter is satisfied."""
    return _threshold(rule, params, sizes.n_R, sizes.n_P)
