import math

import mpmath as mp
import numpy as np
import pytest

from threearm.kernels import _consts, numba_backend, numpy_backend

BACKENDS = [pytest.param(numba_backend, id="numba"), pytest.param(numpy_backend, id="numpy")]


def _gk(f, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    x = np.asarray(_consts.GK_NODES)
    wk = np.asarray(_consts.GK_WEIGHTS)
    pts = x[:-1]
    k = wk[-1] * f(c) + np.sum(wk[:-1] * (f(c - h * pts) + f(c + h * pts)))
    return h * k


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_rule_exact_on_polynomials(deg):
    # the 15-point Kronrod extension integrates degree <= 22 exactly
    got = _gk(lambda t: t**deg, -1.0, 1.0)
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert got == pytest.approx(exact, abs=1e-14)


def test_gauss_rule_nested_in_kronrod_nodes():
    g = np.asarray(_consts.G7_WEIGHTS)
    assert g.sum() * 2 - g[-1] == pytest.approx(2.0, abs=1e-14)


def _bvn_upper_mp(h, k, r):
    mp.mp.dps = 30
    if abs(r) == 1:
        raise ValueError
    s = mp.sqrt(1 - r * r)
    f = lambda x: mp.npdf(x) * mp.ncdf((r * x - k) / s)
    return float(mp.quad(f, [h, h + 5, mp.inf]))


@pytest.mark.parametrize("backend", BACKENDS)
def test_bvnu_matches_mpmath(backend):
    rng = np.random.default_rng(7)
    worst = 0.0
    bvnu = backend.bvnu
    for _ in range(60):
        h, k = rng.uniform(-3, 3, 2)
        r = rng.uniform(-0.99, 0.99)
        got = float(np.asarray(bvnu(h, k, r)))
        worst = max(worst, abs(got - _bvn_upper_mp(h, k, r)))
    assert worst < 1e-13


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("r", [-1.0, 1.0, 0.0])
def test_bvnu_degenerate_correlations(backend, r):
    h, k = 0.3, -0.4
    got = float(np.asarray(backend.bvnu(h, k, r)))
    Q = lambda x: 0.5 * math.erfc(x / math.sqrt(2))
    if r == 0.0:
        want = Q(h) * Q(k)
    elif r == 1.0:
        want = Q(max(h, k))
    else:
        want = max(0.0, Q(h) + Q(k) - 1.0)
    assert got == pytest.approx(want, abs=1e-15)


def _random_corr(rng, singular=False):
    a = rng.normal(size=(3, 2 if singular else 3))
    s = a @ a.T
    d = np.sqrt(np.diag(s))
    c = s / np.outer(d, d)
    np.fill_diagonal(c, 1.0)
    return c


def test_backends_agree_on_rectangles():
    from threearm.gaussian import regularize_corr

    rng = np.random.default_rng(11)
    for i in range(40):
        corr, _ = regularize_corr(_random_corr(rng, singular=i % 2 == 0))
        lo = rng.uniform(-2, 1, 3)
        hi = lo + rng.uniform(0.2, 3, 3)
        hi[rng.integers(3)] = np.inf
        lo[rng.integers(3)] = -np.inf
        p1, _ = numba_backend.tvn_rect(lo, hi, corr, 1e-9)
        p2, _ = numpy_backend.tvn_rect(lo, hi, corr, 1e-9)
        assert p1 == pytest.approx(p2, abs=5e-9)


def test_outcome_codes_backends_identical():
    rng = np.random.default_rng(3)
    xe, xr, xp = rng.normal(0.2, 0.03, (3, 5000))
    args = (0.04, 0.03, 0.045, 1.959963984540054, 0.1, 0.1, 0.08)
    a = numba_backend.outcome_codes(xe, xr, xp, *args)
    b = numpy_backend.outcome_codes(xe, xr, xp, *args)
    assert a.dtype == np.uint8
    np.testing.assert_array_equal(a, b)
    assert set(np.unique(a)) <= set(range(16))


def test_benchmark_smoke():
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    rows = mod.main(["--quick"])
    assert rows[0][4] < 1e-8 and rows[1][4] == 0
