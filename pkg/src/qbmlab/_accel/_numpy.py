"""Pure-numpy implementations of the hot kernels (fallback backend).

Same algorithms as the numba backend: direct stable evaluation of kernel
exponents (real parts are never positive), chunked over output rows to
bound memory.
"""

import numpy as np
from scipy.linalg import solve_banded


def _trapz_weights(x: np.ndarray) -> np.ndarray:
    h = x[1] - x[0]
    w = np.full(len(x), h)
    w[0] = w[-1] = 0.5 * h
    return w


def evolve_density_grid(rho0, x, t, m, hbar, a_sq):
    """rho_t(x_f, y_f) = sum over (x_0, y_0) of exp(J exponent) rho_0,
    trapezoid weights, un-normalized.  Uses Hermitian symmetry of the
    output (rho(x,y) = conj(rho(y,x)))."""
    n = len(x)
    w = _trapz_weights(x)
    src = rho0 * np.outer(w, w)
    it1 = 1j * m / (2.0 * hbar * t)
    k6 = a_sq * t / 6.0
    X0, Y0 = np.meshgrid(x, x, indexing="ij")
    xi0 = X0 - Y0
    out = np.zeros((n, n), dtype=complex)
    for i in range(n):
        xf = x[i]
        yf = x[i:]  # j >= i, fill the rest by symmetry
        xi_f = xf - yf
        # exponent over (j, k, l)
        expo = (it1 * ((xf - X0[None, :, :]) ** 2 - (yf[:, None, None] - Y0[None, :, :]) ** 2)
                - k6 * (xi_f[:, None, None] ** 2 + xi_f[:, None, None] * xi0[None, :, :]
                        + xi0[None, :, :] ** 2))
        out[i, i:] = np.einsum("jkl,kl->j", np.exp(expo), src)
    iu = np.triu_indices(n, k=1)
    out[(iu[1], iu[0])] = np.conj(out[iu])
    return out


def evolve_wigner_grid(w0, p_in, q_in, p_out, q_out, t, m, D):
    """W_t(p, q) as the Green-function convolution of W_0; un-normalized."""
    mu = 1.0 / (D * t)
    nu = 3.0 * m**2 / (D * t**3)
    sig = 3.0 * m / (D * t**2)
    wp = _trapz_weights(p_in)
    wq = _trapz_weights(q_in)
    src = w0 * np.outer(wp, wq)
    P0, Q0 = np.meshgrid(p_in, q_in, indexing="ij")
    drift = Q0 + P0 * t / m
    out = np.empty((len(p_out), len(q_out)))
    for i, p in enumerate(p_out):
        dp = p - P0
        u = q_out[:, None, None] - drift[None, :, :]
        expo = -mu * dp[None, :, :] ** 2 - nu * u**2 + sig * dp[None, :, :] * u
        out[i] = np.einsum("jkl,kl->j", np.exp(expo), src)
    return out


def wigner_from_density_grid(rho, x, pgrid, hbar):
    """W(p, q_i) by the anti-diagonal sum over xi = 2 k h; q grid equals the
    x grid.  1/(2 pi hbar) normalization."""
    n = len(x)
    h = x[1] - x[0]
    out = np.zeros((len(pgrid), n))
    for i in range(n):
        K = min(i, n - 1 - i)
        ks = np.arange(-K, K + 1)
        vals = rho[i + ks, i - ks]
        xi = 2.0 * h * ks
        phases = np.exp(-1j * np.outer(pgrid, xi) / hbar)
        out[:, i] = (phases @ vals).real
    return out * (2.0 * h / (2.0 * np.pi * hbar))


def f_grid_from_density_grid(rho0, x, pgrid, qgrid, A, mu0, b_xi, c_xixi, hbar):
    """Quadrature of the closed-form weight kernel against a density grid."""
    w = _trapz_weights(x)
    src = rho0 * np.outer(w, w)
    X0g, Y0g = np.meshgrid(x, x, indexing="ij")
    Xc = 0.5 * (X0g + Y0g)
    xi0 = X0g - Y0g
    pref = np.sqrt(np.pi / (-A))
    out = np.empty((len(pgrid), len(qgrid)))
    for i, p in enumerate(pgrid):
        B = (-1j * p / hbar + 1j * mu0 * (qgrid[:, None, None] - Xc[None, :, :])
             + b_xi * xi0[None, :, :])
        C = (-1j * mu0 * (qgrid[:, None, None] - Xc[None, :, :]) * xi0[None, :, :]
             + c_xixi * xi0[None, :, :] ** 2)
        vals = np.exp(C - B * B / (4.0 * A))
        out[i] = np.einsum("jkl,kl->j", vals, src).real
    return pref * out


def qsd_run_core(psi0, x, dt, n_steps, a, m, hbar, normals, record_steps):
    """Stochastic pure-state evolution: Crank-Nicolson kinetic step plus an
    exponential (diagonal) noise/localization step, renormalized each step.

    normals: (n_steps, 2) standard normal draws.
    record_steps: sorted step indices (1-based) at which to snapshot psi.
    Returns (snapshots (n_rec, n) complex, boundary densities (n_rec,),
    leaked)."""
    n = len(x)
    h = x[1] - x[0]
    psi = psi0.astype(complex).copy()
    beta = hbar**2 / (2.0 * m * h * h)
    lam = 1j * dt / (2.0 * hbar)
    # H is tridiagonal with diag 2*beta, off-diag -beta (Dirichlet edges)
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = -lam * beta
    ab[1, :] = 1.0 + lam * 2.0 * beta
    ab[2, :-1] = -lam * beta
    snapshots = np.zeros((len(record_steps), n), dtype=complex)
    bds = np.zeros(len(record_steps))
    rec_i = 0
    leaked = False
    sq = np.sqrt(dt / 2.0)
    for step in range(1, n_steps + 1):
        # kinetic: (1 + i dt H / 2hbar) psi' = (1 - i dt H / 2hbar) psi
        rhs = (1.0 - lam * 2.0 * beta) * psi
        rhs[:-1] += lam * beta * psi[1:]
        rhs[1:] += lam * beta * psi[:-1]
        psi = solve_banded((1, 1), ab, rhs)
        # diagonal localization + noise
        norm = np.sqrt(np.sum(np.abs(psi) ** 2) * h)
        psi /= norm
        x_mean = np.sum(x * np.abs(psi) ** 2) * h
        Ld = a * (x - x_mean)
        dxi = (normals[step - 1, 0] + 1j * normals[step - 1, 1]) * sq
        psi = psi * np.exp(-0.5 * Ld * Ld * dt + Ld * dxi)
        norm = np.sqrt(np.sum(np.abs(psi) ** 2) * h)
        psi /= norm
        bd = max(abs(psi[0]) ** 2, abs(psi[-1]) ** 2) * h
        if bd > 1e-8:
            leaked = True
        if rec_i < len(record_steps) and step == record_steps[rec_i]:
            snapshots[rec_i] = psi
            bds[rec_i] = bd
            rec_i += 1
    return snapshots, bds, leaked
