"""Compare the numba kernels against the pure-numpy fallback.

Run directly:  python benchmarks/bench_backends.py [n]
Times the distortion and local-transport kernels on random inputs of
size n (default 100) under both backends and checks they agree.
"""

import sys
import time

import numpy as np

from netgw import _kernels


def _time(fn, *args, repeats=5):
    fn(*args)  # warm-up, lets numba compile outside the timer
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _quantile_prep(w, measure):
    order = np.argsort(w, axis=1, kind="stable")
    atoms = np.take_along_axis(w, order, axis=1)
    cum = np.clip(np.cumsum(measure[order], axis=1), 0.0, 1.0)
    cum[:, -1] = 1.0
    return np.ascontiguousarray(atoms), np.ascontiguousarray(cum)


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
    rng = np.random.default_rng(7)
    wx = rng.normal(size=(n, n))
    wy = rng.normal(size=(n, n))
    mu = rng.random(n) + 0.1
    mu /= mu.sum()
    nu = rng.random(n) + 0.1
    nu /= nu.sum()
    plan = np.outer(mu, nu)
    qx, cx = _quantile_prep(wx, mu)
    qy, cy = _quantile_prep(wy, nu)

    cases = [
        ("dis_pow p=2", _kernels.dis_pow_numpy, (wx, wy, plan, 2.0)),
        ("dis_sup", _kernels.dis_sup_numpy, (wx, wy, plan)),
        ("gp_mass", _kernels.gp_mass_numpy, (wx, wy, plan, 0.5)),
        ("tlb_pow p=2", _kernels.tlb_pow_numpy, (qx, cx, qy, cy, 2.0)),
    ]
    numba_fns = {}
    if _kernels.HAVE_NUMBA:
        numba_fns = {
            "dis_pow p=2": _kernels.dis_pow_numba,
            "dis_sup": _kernels.dis_sup_numba,
            "gp_mass": _kernels.gp_mass_numba,
            "tlb_pow p=2": _kernels.tlb_pow_numba,
        }

    print(f"n = {n}, numba available: {_kernels.HAVE_NUMBA}")
    print(f"{'kernel':<14} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, numpy_fn, args in cases:
        t_np, ref = _time(numpy_fn, *args)
        if name in numba_fns:
            t_nb, out = _time(numba_fns[name], *args)
            scale = np.max(np.abs(np.asarray(ref))) or 1.0
            err = np.max(np.abs(np.asarray(ref) - np.asarray(out))) / scale
            assert err < 1e-10, f"{name}: backends disagree ({err:.2e})"
            print(f"{name:<14} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                  f"{t_np / t_nb:>7.1f}x")
        else:
            print(f"{name:<14} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
