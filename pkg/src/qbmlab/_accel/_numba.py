"""Numba-jitted implementations of the hot kernels (default backend)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _trapz_weights(x):
    h = x[1] - x[0]
    w = np.full(len(x), h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w


@njit(cache=True, fastmath=True)
def evolve_density_grid(rho0, x, t, m, hbar, a_sq):
    n = len(x)
    w = _trapz_weights(x)
    it1 = 1j * m / (2.0 * hbar * t)
    k6 = a_sq * t / 6.0
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        xf = x[i]
        for j in range(i, n):
            yf = x[j]
            xi_f = xf - yf
            acc = 0.0 + 0.0j
            for k in range(n):
                x0 = x[k]
                dxk = xf - x0
                for l in range(n):
                    y0 = x[l]
                    xi0 = x0 - y0
                    expo = (it1 * (dxk * dxk - (yf - y0) * (yf - y0))
                            - k6 * (xi_f * xi_f + xi_f * xi0 + xi0 * xi0))
                    acc += np.exp(expo) * rho0[k, l] * w[k] * w[l]
            out[i, j] = acc
            if j > i:
                out[j, i] = np.conj(acc)
    return out


@njit(cache=True, fastmath=True)
def evolve_wigner_grid(w0, p_in, q_in, p_out, q_out, t, m, D):
    mu = 1.0 / (D * t)
    nu = 3.0 * m**2 / (D * t**3)
    sig = 3.0 * m / (D * t**2)
    wp = _trapz_weights(p_in)
    wq = _trapz_weights(q_in)
    out = np.empty((len(p_out), len(q_out)))
    for i in range(len(p_out)):
        p = p_out[i]
        for j in range(len(q_out)):
            q = q_out[j]
            acc = 0.0
            for k in range(len(p_in)):
                dp = p - p_in[k]
                drift_k = p_in[k] * t / m
                for l in range(len(q_in)):
                    u = q - q_in[l] - drift_k
                    expo = -mu * dp * dp - nu * u * u + sig * dp * u
                    acc += np.exp(expo) * w0[k, l] * wp[k] * wq[l]
            out[i, j] = acc
    return out


@njit(cache=True, fastmath=True)
def wigner_from_density_grid(rho, x, pgrid, hbar):
    n = len(x)
    h = x[1] - x[0]
    out = np.zeros((len(pgrid), n))
    pref = 2.0 * h / (2.0 * np.pi * hbar)
    for ip in range(len(pgrid)):
        p = pgrid[ip]
        for i in range(n):
            K = min(i, n - 1 - i)
            acc = 0.0
            for k in range(-K, K + 1):
                xi = 2.0 * h * k
                val = rho[i + k, i - k] * np.exp(-1j * p * xi / hbar)
                acc += val.real
            out[ip, i] = acc * pref
    return out


@njit(cache=True, fastmath=True)
def f_grid_from_density_grid(rho0, x, pgrid, qgrid, A, mu0, b_xi, c_xixi, hbar):
    n = len(x)
    w = _trapz_weights(x)
    pref = np.sqrt(np.pi / (-A))
    out = np.empty((len(pgrid), len(qgrid)))
    for ip in range(len(pgrid)):
        p = pgrid[ip]
        for iq in range(len(qgrid)):
            q = qgrid[iq]
            acc = 0.0
            for k in range(n):
                for l in range(n):
                    Xc = 0.5 * (x[k] + x[l])
                    xi0 = x[k] - x[l]
                    B = -1j * p / hbar + 1j * mu0 * (q - Xc) + b_xi * xi0
                    C = -1j * mu0 * (q - Xc) * xi0 + c_xixi * xi0 * xi0
                    val = np.exp(C - B * B / (4.0 * A)) * rho0[k, l] * w[k] * w[l]
                    acc += val.real
            out[ip, iq] = acc * pref
    return out


@njit(cache=True, fastmath=True)
def qsd_run_core(psi0, x, dt, n_steps, a, m, hbar, normals, record_steps):
    n = len(x)
    h = x[1] - x[0]
    psi = psi0.astype(np.complex128).copy()
    beta = hbar**2 / (2.0 * m * h * h)
    lam = 1j * dt / (2.0 * hbar)
    diag = 1.0 + lam * 2.0 * beta
    off = -lam * beta
    snapshots = np.zeros((len(record_steps), n), dtype=np.complex128)
    bds = np.zeros(len(record_steps))
    rec_i = 0
    leaked = False
    sq = np.sqrt(dt / 2.0)
    rhs = np.empty(n, dtype=np.complex128)
    cp = np.empty(n, dtype=np.complex128)
    for step in range(1, n_steps + 1):
        # rhs = (1 - lam H) psi
        for i in range(n):
            v = (1.0 - lam * 2.0 * beta) * psi[i]
            if i > 0:
                v += lam * beta * psi[i - 1]
            if i < n - 1:
                v += lam * beta * psi[i + 1]
            rhs[i] = v
        # Thomas solve of the constant tridiagonal (off, diag, off)
        cp[0] = off / diag
        rhs[0] = rhs[0] / diag
        for i in range(1, n):
            denom = diag - off * cp[i - 1]
            if i < n - 1:
                cp[i] = off / denom
            rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom
        for i in range(n - 2, -1, -1):
            rhs[i] = rhs[i] - cp[i] * rhs[i + 1]
        psi[:] = rhs
        # renormalize, then the diagonal localization/noise factor
        nrm = 0.0
        for i in range(n):
            nrm += abs(psi[i]) ** 2
        nrm = np.sqrt(nrm * h)
        x_mean = 0.0
        for i in range(n):
            psi[i] /= nrm
            x_mean += x[i] * abs(psi[i]) ** 2
        x_mean *= h
        dxi = (normals[step - 1, 0] + 1j * normals[step - 1, 1]) * sq
        nrm = 0.0
        for i in range(n):
            Ld = a * (x[i] - x_mean)
            psi[i] *= np.exp(-0.5 * Ld * Ld * dt + Ld * dxi)
            nrm += abs(psi[i]) ** 2
        nrm = np.sqrt(nrm * h)
        for i in range(n):
            psi[i] /= nrm
        bd = max(abs(psi[0]) ** 2, abs(psi[n - 1]) ** 2) * h
        if bd > 1e-8:
            leaked = True
        if rec_i < len(record_steps) and step == record_steps[rec_i]:
            for i in range(n):
                snapshots[rec_i, i] = psi[i]
            bds[rec_i] = bd
            rec_i += 1
    return snapshots, bds, leaked
