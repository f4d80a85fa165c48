"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--quick]

Times the trivariate rectangle integrator on the singular correlation of the
power engine and the outcome-code kernel of the simulator, and checks that
both backends return the same numbers.
"""

import argparse
import math
import time

import numpy as np

from threearm import statistic_correlations
from threearm.gaussian import regularize_corr
from threearm.kernels import numba_backend, numpy_backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_rect(backend, calls, tol):
    corr, _ = regularize_corr(statistic_correlations(531, 68, 529))
    corr = np.ascontiguousarray(corr)
    rng = np.random.default_rng(0)
    lows = rng.uniform(-2.5, 0.5, (calls, 3))
    lows[:, 2] = -np.inf
    highs = np.full((calls, 3), np.inf)
    highs[:, 2] = rng.uniform(-1.0, 2.0, calls)

    def run():
        return [backend.tvn_rect(lows[i], highs[i], corr, tol)[0] for i in range(calls)]

    backend.tvn_rect(lows[0], highs[0], corr, tol)  # compile / warm up
    return best_of(run, 3)


def bench_codes(backend, n):
    rng = np.random.default_rng(1)
    xe = rng.normal(0.2, 0.5 / math.sqrt(538), n)
    xr = rng.normal(0.2, 0.5 / math.sqrt(547), n)
    xp = rng.normal(0.0, 0.5 / math.sqrt(159), n)
    args = (0.5 * math.sqrt(1 / 538 + 1 / 159), 0.5 * math.sqrt(1 / 538 + 1 / 547),
            0.5 * math.sqrt(1 / 547 + 1 / 159), 1.959963984540054, 0.1, 0.1, 0.0883)
    backend.outcome_codes(xe[:10], xr[:10], xp[:10], *args)
    return best_of(lambda: backend.outcome_codes(xe, xr, xp, *args), 5)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="small problem sizes (smoke test)")
    args = ap.parse_args(argv)
    calls = 20 if args.quick else 400
    n = 10_000 if args.quick else 1_000_000
    rows = []
    (t_nb, p_nb), (t_np, p_np) = bench_rect(numba_backend, calls, 1e-7), bench_rect(numpy_backend, calls, 1e-7)
    rows.append(("tvn_rect", f"{calls} calls", t_nb, t_np, float(np.max(np.abs(np.subtract(p_nb, p_np))))))
    (t_nb, c_nb), (t_np, c_np) = bench_codes(numba_backend, n), bench_codes(numpy_backend, n)
    rows.append(("outcome_codes", f"{n} trials", t_nb, t_np, float(np.count_nonzero(c_nb != c_np))))
    print(f"{'kernel':<15}{'size':>16}{'numba s':>11}{'numpy s':>11}{'speedup':>9}{'max diff':>11}")
    for name, size, a, b, diff in rows:
        print(f"{name:<15}{size:>16}{a:>11.4f}{b:>11.4f}{b / a:>8.1f}x{diff:>11.2e}")
    return rows


if __name__ == "__main__":
    main()
