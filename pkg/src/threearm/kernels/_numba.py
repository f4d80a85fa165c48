"""Compiled scalar kernels: bivariate normal orthants, trivariate rectangles by
adaptive conditioning quadrature, and per-trial outcome coding."""

import math

import numba
import numpy as np

from ._consts import (
    GK_NODES,
    GK_WEIGHTS,
    GL_NODES,
    GL_WEIGHTS,
    G7_WEIGHTS,
    LIMIT_CLAMP,
    MAX_INTERVALS,
    TAIL,
)

_JIT = dict(nogil=True, cache=True)

_SQRT2 = math.sqrt(2.0)
_TWOPI = 2.0 * math.pi


@numba.njit(**_JIT)
def phi_cdf(x):
    return 0.5 * math.erfc(-x / _SQRT2)


@numba.njit(**_JIT)
def bvnu(dh, dk, r):
    """P(X > dh, Y > dk) for a standard bivariate normal with correlation r."""
    if dh == np.inf or dk == np.inf:
        return 0.0
    if dh == -np.inf:
        if dk == -np.inf:
            return 1.0
        return phi_cdf(-dk)
    if dk == -np.inf:
        return phi_cdf(-dh)
    h = min(max(dh, -LIMIT_CLAMP), LIMIT_CLAMP)
    k = min(max(dk, -LIMIT_CLAMP), LIMIT_CLAMP)
    ar = abs(r)
    if ar < 0.3:
        ng = 0
        lg = 3
    elif ar < 0.75:
        ng = 1
        lg = 6
    else:
        ng = 2
        lg = 10
    hk = h * k
    bvn = 0.0
    if ar < 0.925:
        hs = (h * h + k * k) / 2.0
        asr = math.asin(r)
        for i in range(lg):
            sn = math.sin(asr * (1.0 - GL_NODES[ng, i]) / 2.0)
            bvn += GL_WEIGHTS[ng, i] * math.exp((sn * hk - hs) / (1.0 - sn * sn))
            sn = math.sin(asr * (1.0 + GL_NODES[ng, i]) / 2.0)
            bvn += GL_WEIGHTS[ng, i] * math.exp((sn * hk - hs) / (1.0 - sn * sn))
        return bvn * asr / (4.0 * math.pi) + phi_cdf(-h) * phi_cdf(-k)
    if r < 0.0:
        k = -k
        hk = -hk
    if ar < 1.0:
        as_ = (1.0 - r) * (1.0 + r)
        a = math.sqrt(as_)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        bvn = a * math.exp(-(bs / as_ + hk) / 2.0) * (
            1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0
        )
        if hk > -160.0:
            b = math.sqrt(bs)
            bvn -= (
                math.exp(-hk / 2.0) * math.sqrt(_TWOPI) * phi_cdf(-b / a) * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
            )
        a = a / 2.0
        for i in range(lg):
            for sgn in (-1.0, 1.0):
                xs = (a * (1.0 + sgn * GL_NODES[ng, i])) ** 2
                rs = math.sqrt(1.0 - xs)
                asr = -(bs / xs + hk) / 2.0
                if asr > -100.0:
                    bvn += a * GL_WEIGHTS[ng, i] * math.exp(asr) * (
                        math.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
                        - (1.0 + c * xs * (1.0 + d * xs))
                    )
        bvn = -bvn / _TWOPI
    if r > 0.0:
        bvn += phi_cdf(-max(h, k))
    else:
        bvn = -bvn
        if k > h:
            if h < 0.0:
                bvn += phi_cdf(k) - phi_cdf(h)
            else:
                bvn += phi_cdf(-h) - phi_cdf(-k)
    return min(max(bvn, 0.0), 1.0)


@numba.njit(**_JIT)
def bvn_rect(a1, b1, a2, b2, r):
    if a1 >= b1 or a2 >= b2:
        return 0.0
    p = bvnu(a1, a2, r) - bvnu(b1, a2, r) - bvnu(a1, b2, r) + bvnu(b1, b2, r)
    return min(max(p, 0.0), 1.0)


@numba.njit(**_JIT)
def _cond_density(x, aj, bj, ak, bk, rij, rik, sj, sk, rc):
    # phi(x) * P(coords j, k in their box | coord i = x)
    w = math.exp(-0.5 * x * x) / math.sqrt(_TWOPI)
    return w * bvn_rect(
        (aj - rij * x) / sj, (bj - rij * x) / sj,
        (ak - rik * x) / sk, (bk - rik * x) / sk, rc,
    )


@numba.njit(**_JIT)
def _gk15(lo, hi, aj, bj, ak, bk, rij, rik, sj, sk, rc):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fc = _cond_density(mid, aj, bj, ak, bk, rij, rik, sj, sk, rc)
    kron = fc * GK_WEIGHTS[7]
    gauss = fc * G7_WEIGHTS[3]
    for m in range(7):
        dx = half * GK_NODES[m]
        f1 = _cond_density(mid - dx, aj, bj, ak, bk, rij, rik, sj, sk, rc)
        f2 = _cond_density(mid + dx, aj, bj, ak, bk, rij, rik, sj, sk, rc)
        kron += GK_WEIGHTS[m] * (f1 + f2)
        if m % 2 == 1:
            gauss += G7_WEIGHTS[m // 2] * (f1 + f2)
    return kron * half, abs(kron - gauss) * half


@numba.njit(**_JIT)
def tvn_rect(lower, upper, corr, tol):
    """P(lower <= Z <= upper), Z standard trivariate normal with correlation `corr`.

    Returns (probability, error estimate). Coordinates unbounded on both sides
    are marginalised analytically; otherwise one coordinate is integrated by
    adaptive Gauss-Kronrod against the exact conditional bivariate law.
    """
    for m in range(3):
        if lower[m] >= upper[m]:
            return 0.0, 0.0
    nb_ = 0
    idx = np.empty(3, dtype=np.int64)
    for m in range(3):
        if lower[m] > -np.inf or upper[m] < np.inf:
            idx[nb_] = m
            nb_ += 1
    if nb_ == 0:
        return 1.0, 0.0
    if nb_ == 1:
        m = idx[0]
        return phi_cdf(upper[m]) - phi_cdf(lower[m]), 0.0
    if nb_ == 2:
        j = idx[0]
        k = idx[1]
        return bvn_rect(lower[j], upper[j], lower[k], upper[k], corr[j, k]), 0.0

    # condition on the coordinate least correlated with the other two
    best = 0
    best_r = 2.0
    for m in range(3):
        rr = max(abs(corr[m, (m + 1) % 3]), abs(corr[m, (m + 2) % 3]))
        if rr < best_r:
            best_r = rr
            best = m
    i = best
    j = (i + 1) % 3
    k = (i + 2) % 3
    rij = corr[i, j]
    rik = corr[i, k]
    sj = math.sqrt(max(1.0 - rij * rij, 1e-300))
    sk = math.sqrt(max(1.0 - rik * rik, 1e-300))
    rc = (corr[j, k] - rij * rik) / (sj * sk)
    rc = min(max(rc, -1.0), 1.0)

    lo = max(lower[i], -TAIL)
    hi = min(upper[i], TAIL)
    if lo >= hi:
        return 0.0, 0.0
    aj = lower[j]
    bj = upper[j]
    ak = lower[k]
    bk = upper[k]

    span = hi - lo
    # each panel must meet its share of tol, the same acceptance rule as the
    # numpy backend; a global sum lets a few panels hide underestimated errors
    los = np.empty(MAX_INTERVALS)
    his = np.empty(MAX_INTERVALS)
    n = 8
    width = span / n
    for m in range(n):
        los[m] = lo + m * width
        his[m] = hi if m == n - 1 else lo + (m + 1) * width
    total = 0.0
    total_err = 0.0
    while n > 0:
        n -= 1
        a = los[n]
        b = his[n]
        v, e = _gk15(a, b, aj, bj, ak, bk, rij, rik, sj, sk, rc)
        c = 0.5 * (a + b)
        if (e <= tol * (b - a) / span or b - a <= 1e-12 * span
                or n + 2 > MAX_INTERVALS or c <= a or c >= b):
            total += v
            total_err += e
            continue
        los[n] = a
        his[n] = c
        los[n + 1] = c
        his[n + 1] = b
        n += 2
    return min(max(total, 0.0), 1.0), total_err


@numba.njit(**_JIT)
def outcome_codes(xe, xr, xp, se_ep, se_er, se_rp, crit, delta, delta_n, tau):
    """Bit-code each simulated trial: 1 = E>P superiority, 2 = non-inferiority,
    4 = delta-superiority, 8 = filter satisfied."""
    n = xe.shape[0]
    out = np.empty(n, dtype=np.uint8)
    for t in range(n):
        d_ep = xe[t] - xp[t]
        code = 0
        if d_ep / se_ep >= crit:
            code |= 1
        if (xe[t] - xr[t] + delta_n) / se_er >= crit:
            code |= 2
        if (d_ep - delta) / se_ep >= crit:
            code |= 4
        if xr[t] - xp[t] >= tau:
            code |= 8
        out[t] = code
    return out
