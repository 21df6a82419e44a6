"""Timing comparison of the numpy and numba kernel implementations.

Feeds identical pre-drawn input arrays to both backends of every kernel,
reports wall time per call and the speedup, and cross-checks that the
outputs agree (exactly for integer counters, to 1e-12 relative for float
reductions). Run as a script:

    python3 benchmarks/bench_backends.py [--trials N] [--repeat K]

When numba is unavailable (or COGHARVEST_BACKEND=numpy hides it), only the
numpy column is reported.
"""

import argparse
import time

import numpy as np

from cogharvest import _kernels


def _time(fn, args, repeat):
    fn(*args)  # warm-up; also triggers JIT compilation for numba
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _segments(g, n_trials, mean_pts):
    counts = g.poisson(mean_pts, size=n_trials)
    offsets = np.zeros(n_trials + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    r2 = g.uniform(0.25, 2500.0, int(offsets[-1]))
    return r2, offsets


def build_cases(trials):
    g = np.random.default_rng(2024)
    cases = []

    r2, offsets = _segments(g, trials, 80.0)
    cases.append(("power_sums", (r2, offsets, 2.0),
                  _kernels._power_sums_np, _kernels._power_sums_nb, "float"))

    u = g.random(trials * 40)
    cases.append(("chain_counts", (u, 0.118, 0.031, 1000, 0),
                  _kernels._chain_counts_np, _kernels._chain_counts_nb, "int"))

    r2p, offp = _segments(g, trials, 80.0)
    cases.append(("positional_chain_block", (r2p, offp, 4.0, 1.0, 1000, 0),
                  _kernels._positional_chain_block_np,
                  _kernels._positional_chain_block_nb, "int"))

    n = max(trials // 8, 64)
    pc = g.poisson(80.0, size=n)
    poff = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(pc, out=poff[1:])
    ppx = g.uniform(-50, 50, int(poff[-1]))
    ppy = g.uniform(-50, 50, int(poff[-1]))
    sc = g.poisson(780.0, size=n)
    soff = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(sc, out=soff[1:])
    spx = g.uniform(-50, 50, int(soff[-1]))
    spy = g.uniform(-50, 50, int(soff[-1]))
    charged = g.random(int(soff[-1])) < 0.03
    cases.append(("interference_totals",
                  (ppx, ppy, poff, spx, spy, soff, charged,
                   4.0, 0.1, 2.0, 1.0, True),
                  _kernels._interference_totals_np,
                  _kernels._interference_totals_nb, "float"))
    return cases


def _agree(kind, a, b) -> bool:
    if kind == "int":
        return tuple(a) == tuple(b)
    return bool(np.allclose(a, b, rtol=1e-12, atol=0.0))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20_000,
                    help="trial/slot count per kernel call (default 20000)")
    ap.add_argument("--repeat", type=int, default=5,
                    help="timing repetitions, best is kept (default 5)")
    args = ap.parse_args()

    have_numba = _kernels._HAVE_NUMBA
    print(f"active backend: {_kernels.BACKEND}"
          + ("" if have_numba else " (numba unavailable; numpy column only)"))
    print(f"{'kernel':<26} {'numpy':>10} {'numba':>10} {'speedup':>8}  agree")
    for name, call_args, np_fn, nb_fn, kind in build_cases(args.trials):
        t_np = _time(np_fn, call_args, args.repeat)
        if have_numba:
            t_nb = _time(nb_fn, call_args, args.repeat)
            out_np = np_fn(*call_args)
            out_nb = nb_fn(*call_args)
            agree = "yes" if _agree(kind, out_np, out_nb) else "NO"
            print(f"{name:<26} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>7.1f}x  {agree}")
        else:
            print(f"{name:<26} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}  -")


if __name__ == "__main__":
    main()
