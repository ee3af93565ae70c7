"""Timing comparison of the compiled kernel backend against the numpy one.

Runs every function in fracspike.kernels on representative problem sizes
with both implementations, checks they agree to rounding, and prints the
median per-call times and the speedup. Usage:

    python benchmarks/bench_kernels.py [--repeats N] [--points M]
"""

import argparse
import time

import numpy as np

from fracspike.kernels import _ref

try:
    from fracspike.kernels import _corekern
except ImportError:
    _corekern = None


def median_time(fn, args, repeats):
    fn(*args)  # warm-up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def agreement(a, b):
    if isinstance(a, tuple):
        return max(agreement(x, y) for x, y in zip(a, b))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return np.inf
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def build_cases(M):
    rng = np.random.default_rng(7)
    L = 40.0
    x = -L + 2.0 * L * np.arange(M) / M
    centers1 = np.array([-12.0, 0.0, 9.5])
    centers2 = rng.uniform(-L, L, size=(3, 2))
    u1 = rng.standard_normal(M)
    M2 = max(M // 8, 64)
    u2 = rng.standard_normal((M2, M2))
    w_stack = np.abs(rng.standard_normal((3, M))) + 0.1
    lam = np.array([1.0, 1.3, 0.8])
    V_vals = 1.0 + 0.1 * np.cos(np.pi * x / L)
    phi = 0.01 * rng.standard_normal(M)
    r2 = np.sqrt(x[:, None] ** 2 + x[None, :] ** 2) if M2 == M else None
    x2 = -L + 2.0 * L * np.arange(M2) / M2
    r2 = np.sqrt(x2[:, None] ** 2 + x2[None, :] ** 2)
    nbins = int(L / (2 * L / M2)) + 2

    return [
        ("rho_field_1d", f"M={M}, k=3", (x, centers1, 0.75, L)),
        ("rho_field_2d", f"M={M2}^2, k=3", (x2, centers2, 1.25, L)),
        ("positive_power", f"M={M}", (u1, 2.0)),
        ("nonlinear_remainder", f"M={M}", (w_stack[0], phi, 2.0)),
        ("ansatz_error", f"M={M}, k=3", (w_stack, lam, V_vals, 2.0)),
        ("local_maxima_1d", f"M={M}", (u1, 1.5)),
        ("local_maxima_2d", f"M={M2}^2", (u2, 1.5)),
        ("radial_bin", f"M={M2}^2", (u2, r2, 2 * L / M2, nbins)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=25)
    ap.add_argument("--points", type=int, default=4096,
                    help="1d problem size; 2d uses (points/8)^2")
    args = ap.parse_args()

    if _corekern is None:
        raise SystemExit("compiled backend not available; build the "
                         "extension first (pip install -e .)")

    cases = build_cases(args.points)
    width = max(len(name) for name, _, _ in cases)
    print(f"{'kernel':<{width}}  {'size':<12} {'numpy':>10} {'cython':>10} "
          f"{'speedup':>8}  max|diff|")
    for name, size, fargs in cases:
        ref_fn = getattr(_ref, name)
        core_fn = getattr(_corekern, name)
        diff = agreement(ref_fn(*fargs), core_fn(*fargs))
        t_ref = median_time(ref_fn, fargs, args.repeats)
        t_core = median_time(core_fn, fargs, args.repeats)
        print(f"{name:<{width}}  {size:<12} {t_ref * 1e6:>8.1f}us "
              f"{t_core * 1e6:>8.1f}us {t_ref / t_core:>7.2f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
