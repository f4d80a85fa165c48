"""Standard normal helpers and trivariate normal rectangle probabilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from . import kernels
from .errors import NumericDomainError, ParameterDomainError

PSD_TOL = 1e-10
EIG_FLOOR = 1e-10
DEFAULT_TOL = 1e-7


def std_normal_cdf(x):
    return ndtr(x)


def std_normal_quantile(q):
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0.0) & (q_arr < 1.0))):
        raise ParameterDomainError(f"quantile level must lie in (0, 1), got {q}")
    out = ndtri(q_arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class TrivariateNormal:
    mean: np.ndarray
    corr: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(3)
        corr = np.asarray(self.corr, dtype=float).reshape(3, 3)
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(corr)):
            raise NumericDomainError("mean and correlation must be finite")
        if not np.allclose(corr, corr.T, atol=1e-12):
            raise NumericDomainError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(corr), 1.0, atol=1e-12):
            raise NumericDomainError("correlation matrix must have unit diagonal")
        if np.linalg.eigvalsh(corr).min() < -PSD_TOL:
            raise NumericDomainError("correlation matrix is not positive semi-definite")
        mean.setflags(write=False)
        corr.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "corr", corr)


@dataclass(frozen=True, eq=False)
class Rect3:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).reshape(3)
        upper = np.asarray(self.upper, dtype=float).reshape(3)
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ParameterDomainError("rectangle limits must not be NaN")
        if np.any(lower > upper):
            raise ParameterDomainError("rectangle needs lower <= upper in every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


@dataclass(frozen=True)
class RectProb:
    value: float
    error: float
    regularized: bool


@dataclass(frozen=True)
class QMCEstimate:
    value: float
    stderr: float
    n_points: int
    replicates: int


def regularize_corr(corr):
    """Lift eigenvalues below EIG_FLOOR to EIG_FLOOR and restore the unit
    diagonal. Returns ``(matrix, changed)``."""
    corr = np.asarray(corr, dtype=float)
    w, v = np.linalg.eigh(corr)
    if w.min() < -PSD_TOL:
        raise NumericDomainError("correlation matrix is not positive semi-definite")
    if w.min() >= EIG_FLOOR:
        return corr, False
    fixed = (v * np.maximum(w, EIG_FLOOR)) @ v.T
    d = np.sqrt(np.diag(fixed))
    fixed = fixed / np.outer(d, d)
    np.fill_diagonal(fixed, 1.0)
    return 0.5 * (fixed + fixed.T), True


def _standardized_limits(dist: TrivariateNormal, rect: Rect3):
    # inf - finite stays inf
    return rect.lower - dist.mean, rect.upper - dist.mean


def rect_prob(dist: TrivariateNormal, rect: Rect3, tol: float = DEFAULT_TOL) -> RectProb:
    """P(lower <= Z <= upper) for Z ~ dist, to absolute accuracy ``tol``."""
    if not tol >= 1e-10:
        raise ParameterDomainError(f"tol must be >= 1e-10, got {tol}")
    corr, changed = regularize_corr(dist.corr)
    lo, hi = _standardized_limits(dist, rect)
    value, err = kernels.tvn_rect(lo, hi, np.ascontiguousarray(corr), float(tol))
    return RectProb(float(value), float(err), changed)


def rect_prob_qmc(
    dist: TrivariateNormal,
    rect: Rect3,
    n_points: int = 2**16,
    seed: int = 0,
    replicates: int = 32,
) -> QMCEstimate:
    """Randomised quasi-Monte Carlo estimate with a replicate-based standard error.

    Uses the separation-of-variables transform on the Cholesky factor, so the
    integrand is smooth in two scrambled-Sobol coordinates and the last
    coordinate is integrated in closed form. A rank-2 correlation is handled
    exactly: the dependent coordinate becomes a second interval on the last
    free variable, leaving a one-dimensional integrand.
    """
    if n_points < 1000:
        raise ParameterDomainError(f"n_points must be >= 1000, got {n_points}")
    if replicates < 2:
        raise ParameterDomainError("need at least two randomisation replicates")
    lo, hi = _standardized_limits(dist, rect)
    rank2 = np.linalg.eigvalsh(dist.corr)[0] < EIG_FLOOR
    if rank2:
        order, factor = _rank2_factor(dist.corr)
        lo, hi = lo[order], hi[order]
        mean_fn = lambda w: _sov_rank2_mean(factor, lo, hi, w)
    else:
        chol = np.linalg.cholesky(dist.corr)
        mean_fn = lambda w: _sov_mean(chol, lo, hi, w)
    per_rep = max(2, n_points // replicates)
    children = np.random.SeedSequence(seed).spawn(replicates)
    estimates = np.empty(replicates)
    for r, child in enumerate(children):
        sobol = qmc.Sobol(d=1 if rank2 else 2, scramble=True, seed=np.random.default_rng(child))
        estimates[r] = mean_fn(sobol.random(per_rep))
    return QMCEstimate(
        value=float(estimates.mean()),
        stderr=float(estimates.std(ddof=1) / np.sqrt(replicates)),
        n_points=per_rep * replicates,
        replicates=replicates,
    )


def _sov_mean(chol, lo, hi, w):
    eps = np.finfo(float).eps
    n = w.shape[0]
    y = np.zeros((n, 2))
    weight = np.ones(n)
    for i in range(3):
        shift = y[:, :i] @ chol[i, :i] if i else 0.0
        d = ndtr((lo[i] - shift) / chol[i, i])
        e = ndtr((hi[i] - shift) / chol[i, i])
        weight = weight * np.maximum(e - d, 0.0)
        if i < 2:
            u = np.clip(d + w[:, i] * (e - d), eps, 1.0 - eps)
            y[:, i] = ndtri(u)
    return weight.mean()


def _rank2_factor(corr):
    """Order the coordinates so the least correlated pair leads, and return
    rows ``a_i`` with ``Z_i = a_i . (y0, y1)`` for independent normals y."""
    pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)]
    i, j, k = min(pairs, key=lambda t: abs(corr[t[0], t[1]]))
    order = np.array([i, j, k])
    c = corr[np.ix_(order, order)]
    r01 = c[0, 1]
    s1 = np.sqrt(1.0 - r01 * r01)
    a2 = np.array([c[0, 2], (c[1, 2] - r01 * c[0, 2]) / s1])
    return order, np.array([[1.0, 0.0], [r01, s1], a2])


def _sov_rank2_mean(a, lo, hi, w):
    eps = np.finfo(float).eps
    d0, e0 = ndtr(lo[0]), ndtr(hi[0])
    y0 = ndtri(np.clip(d0 + w[:, 0] * (e0 - d0), eps, 1.0 - eps))
    # y1 interval from coordinate 1
    lo1 = (lo[1] - a[1, 0] * y0) / a[1, 1]
    hi1 = (hi[1] - a[1, 0] * y0) / a[1, 1]
    # and from the dependent coordinate 2
    c0, c1 = a[2]
    with np.errstate(divide="ignore", invalid="ignore"):
        if abs(c1) > 1e-12:
            p, q = (lo[2] - c0 * y0) / c1, (hi[2] - c0 * y0) / c1
            lo2, hi2 = np.minimum(p, q), np.maximum(p, q)
        else:
            inside = (c0 * y0 >= lo[2]) & (c0 * y0 <= hi[2])
            lo2 = np.where(inside, -np.inf, np.inf)
            hi2 = np.full_like(y0, np.inf)
    a1, b1 = np.maximum(lo1, lo2), np.minimum(hi1, hi2)
    # upper-tail form keeps precision when both limits are large
    inner = np.where(a1 > 0, ndtr(-a1) - ndtr(-b1), ndtr(b1) - ndtr(a1))
    return ((e0 - d0) * np.maximum(inner, 0.0)).mean()
