"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``.  Each kernel is timed on
both backends with identical inputs, and the largest difference between
their outputs is reported alongside the speed-up.
"""

import argparse
import timeit

import numpy as np

from stabpath import _kernels_py
from stabpath.gw_model import builtin_p1, endomorphism_terms, p1_params

try:
    from stabpath import _kernels
except ImportError:
    _kernels = None


def bessel_case(n):
    rng = np.random.default_rng(7)
    r = rng.uniform(0.05, 40.0, n)
    ang = rng.uniform(-0.45 * np.pi, 1.45 * np.pi, n)
    z = r * np.exp(1j * ang)
    return lambda mod: mod.bessel01(z, True), lambda out: np.nanmax(
        np.abs(np.array(out[0][:6]) - np.array(out[1][:6])) / (1 + np.abs(np.array(out[1][:6]))))


def ode_case(t1):
    model, params = builtin_p1(0), p1_params(0.3)
    zinv = 1.0 / complex(params.z)
    coeffs, powers = [], []
    for p, c in endomorphism_terms(model, params):
        coeffs.append(-zinv * c)
        powers.append(p - 1.0)
    coeffs = np.array(coeffs, dtype=np.complex128)
    powers = np.array(powers)
    t = np.geomspace(1.0, t1, 64)
    y0 = np.eye(2, dtype=np.complex128)

    def run(mod):
        return mod.integrate_linear(coeffs, powers, y0, t, 1e-10, 2.0)

    def diff(out):
        (ya, ga, *_), (yb, gb, *_) = out
        full_a = ya * np.exp(ga)[:, None, None]
        full_b = yb * np.exp(gb)[:, None, None]
        return float(np.max(np.abs(full_a - full_b) / (1 + np.abs(full_b))))

    return run, diff


def time_case(name, run, diff, repeat):
    py = min(timeit.repeat(lambda: run(_kernels_py), number=1, repeat=repeat))
    if _kernels is None:
        print(f"{name:28s} python {py * 1e3:9.2f} ms   compiled backend not built")
        return
    c = min(timeit.repeat(lambda: run(_kernels), number=1, repeat=repeat))
    delta = diff((run(_kernels), run(_kernels_py)))
    print(f"{name:28s} python {py * 1e3:9.2f} ms   compiled {c * 1e3:8.2f} ms   "
          f"speed-up {py / c:6.1f}x   max rel diff {delta:.1e}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    for n in (200, 2000):
        time_case(f"bessel01, {n} points", *bessel_case(n), args.repeat)
    for t1 in (10.0, 40.0):
        time_case(f"integrate_linear, t1 = {t1:g}", *ode_case(t1), args.repeat)


if __name__ == "__main__":
    main()
