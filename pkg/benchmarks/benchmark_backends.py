"""Timing comparison of the jitted and pure-numpy backends for the five hot
kernels.

Run:
    python3 benchmarks/benchmark_backends.py [--repeat N]

The numba functions are called once before timing so compilation is not
measured.
"""

import argparse
import time

import numpy as np

from qbmlab import cat_state
from qbmlab._accel import _numba, _numpy
from qbmlab.gaussians import density_from_state
from qbmlab.kernels import _f_exponent_pieces
from qbmlab.model import ModelParams, derive_scales


def _cases():
    scales = derive_scales(ModelParams(1.0, 1.0, 1.0))
    x = np.linspace(-10.0, 10.0, 257)
    rho = np.ascontiguousarray(
        density_from_state(cat_state(4.0, scales).normalized()).evaluate_grid(x))

    # the double quadrature is O(n^4): keep this case small
    xs = np.linspace(-10.0, 10.0, 121)
    rho_s = np.ascontiguousarray(
        density_from_state(cat_state(4.0, scales).normalized()).evaluate_grid(xs))
    yield ("evolve_density_grid", "evolve_density_grid",
           (rho_s, xs, 0.8, scales.m, scales.hbar, scales.a_sq))

    rng = np.random.default_rng(0)
    p_in = np.linspace(-6, 6, 97)
    q_in = np.linspace(-6, 6, 97)
    w0 = np.ascontiguousarray(rng.random((97, 97)))
    yield ("evolve_wigner_grid", "evolve_wigner_grid",
           (w0, p_in, q_in, p_in[::2].copy(), q_in[::2].copy(),
            0.7, scales.m, scales.D))

    pgrid = np.linspace(-8, 8, 257)
    yield ("wigner_from_density_grid", "wigner_from_density_grid",
           (rho, x, pgrid, scales.hbar))

    pieces = _f_exponent_pieces(5.0, scales, exact=True)
    yield ("f_grid_from_density_grid", "f_grid_from_density_grid",
           (rho, x, np.linspace(-8, 8, 49), np.linspace(-12, 12, 49),
            pieces["A"], pieces["mu0"], pieces["b_xi"], pieces["c_xixi"],
            scales.hbar))

    psi = np.exp(-0.5 * x**2).astype(complex)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * (x[1] - x[0]))
    n_steps = 400
    normals = rng.standard_normal((n_steps, 2))
    record = np.array([n_steps], dtype=np.int64)
    yield ("qsd_run_core", "qsd_run_core",
           (psi, x, 5e-4, n_steps, np.sqrt(scales.a_sq), scales.m,
            scales.hbar, normals, record))


def _time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    print(f"{'kernel':<28} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>9}")
    for name, attr, call_args in _cases():
        fn_nb = getattr(_numba, attr)
        fn_np = getattr(_numpy, attr)
        fn_nb(*call_args)  # trigger compilation outside the timer
        t_np = _time(fn_np, call_args, args.repeat)
        t_nb = _time(fn_nb, call_args, args.repeat)
        print(f"{name:<28} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
