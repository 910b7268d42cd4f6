"""Closed-form kernels: the density-matrix propagator J, the driven
complex-oscillator coefficients c1..c5, the Wigner-function propagator and
the phase-space weight kernel.

All kernels are handled as exponents; `exp_eval` factors out the largest
real part before exponentiation so that desk-scale exponents (Re down to
-1e3) never underflow silently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import DomainError
from .gaussians import DensityForm, GaussianPair, gauss2d_integral
from .model import DerivedScales


def exp_eval(exponents: np.ndarray) -> tuple[np.ndarray, float]:
    """exp(exponents) split as (exp(exponents - shift), shift) with shift the
    largest real part, so the returned array never overflows."""
    exponents = np.asarray(exponents)
    shift = float(np.max(exponents.real))
    return np.exp(exponents - shift), shift


# ---------------------------------------------------------------------------
# the density-matrix propagator J
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JKernel:
    """Exponent of the propagator taking rho_0(x_0, y_0) to rho_t(x_f, y_f):
    free-streaming phases minus the off-diagonal suppression quadratic in
    the separations xi = x - y."""

    t: float
    scales: DerivedScales

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"J kernel needs t > 0, got {self.t}")

    def exponent(self, x_f, y_f, x_0, y_0):
        s = self.scales
        t = self.t
        xi_f = np.asarray(x_f) - np.asarray(y_f)
        xi_0 = np.asarray(x_0) - np.asarray(y_0)
        phase = (1j * s.m / (2.0 * s.hbar * t)) * ((x_f - x_0) ** 2 - (y_f - y_0) ** 2)
        damp = -(s.a_sq * t / 6.0) * (xi_f**2 + xi_f * xi_0 + xi_0**2)
        return phase + damp

    def forms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Exponent as z A z/2 + z B z0 + z0 C z0/2 with z = (x_f, y_f),
        z0 = (x_0, y_0)."""
        s = self.scales
        it1 = 1j * s.m / (2.0 * s.hbar * self.t)
        k6 = s.a_sq * self.t / 6.0
        A = np.array([[2.0 * (it1 - k6), 2.0 * k6],
                      [2.0 * k6, 2.0 * (-it1 - k6)]], dtype=complex)
        B = np.array([[-2.0 * it1 - k6, k6],
                      [k6, 2.0 * it1 - k6]], dtype=complex)
        return A, B, A.copy()


def j_exponent(k: JKernel, x_f, y_f, x_0, y_0):
    return k.exponent(x_f, y_f, x_0, y_0)


def propagate_density_form(form: DensityForm, t: float, scales: DerivedScales) -> DensityForm:
    """Apply J to a sum of bilinear Gaussian terms exactly (2x2 complex
    Gaussian integrals); renormalized to unit trace, which also absorbs the
    prefactor the closed-form propagator drops."""
    A, B, C = JKernel(t, scales).forms()
    out = []
    for term in form.terms:
        S = C + term.M
        negS = -S.real
        if not (negS[0, 0] > 0 and np.linalg.det(negS) > 0):
            raise DomainError("propagated term has divergent source integral")
        Sinv = np.linalg.inv(S)
        Mp = A - B @ Sinv @ B.T
        bp = -B @ Sinv @ form_b(term)
        det = (-S[0, 0]) * (-S[1, 1]) - S[0, 1] * S[1, 0]
        cp = (term.c - 0.5 * (form_b(term) @ Sinv @ form_b(term))
              + math.log(2.0 * math.pi) - 0.5 * cmath.log(det))
        out.append(GaussianPair(Mp, bp, cp))
    return DensityForm(tuple(out), form.hbar).normalized()


def form_b(term: GaussianPair) -> np.ndarray:
    return term.b


# ---------------------------------------------------------------------------
# driven complex-oscillator coefficients c1..c5
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DrivingPath:
    """Piecewise-linear driving function sampled on a uniform mesh of [0, t]."""

    samples: np.ndarray
    t: float

    def __post_init__(self):
        if len(self.samples) < 2:
            raise DomainError("driving path needs at least 2 samples")
        if not self.t > 0:
            raise DomainError(f"driving path needs t > 0, got {self.t}")

    @property
    def mesh(self) -> np.ndarray:
        return np.linspace(0.0, self.t, len(self.samples))

    @staticmethod
    def zero(t: float, n: int = 3) -> "DrivingPath":
        return DrivingPath(np.zeros(n), t)


@dataclass(frozen=True)
class KernelCoeffs:
    c1: complex
    c2: complex
    c3: complex
    c4: complex
    c5: complex
    omega: complex
    t: float


def kbar_coeffs(path: DrivingPath, scales: DerivedScales) -> KernelCoeffs:
    """Coefficients of the driven kernel exponent: c1, c2 in closed form;
    c3, c4 by composite Simpson; c5 by a cumulative inner integral followed
    by an outer Simpson (the s' < s ordering)."""
    t = path.t
    w = scales.omega
    sin_wt = np.sin(w * t)
    # sin(omega t) never vanishes for omega = alpha(1 - i), t > 0
    assert abs(sin_wt) > 0
    m = scales.m
    c1 = m * w * np.cos(w * t) / (2.0 * sin_wt)
    c2 = -m * w / sin_wt

    if len(path.samples) < 3:
        raise DomainError("Simpson quadrature needs at least 3 path samples")
    s_mesh = path.mesh
    xbar = path.samples
    a_sq = scales.a_sq
    c3 = (2.0 * a_sq / sin_wt) * simpson(xbar * np.sin(w * s_mesh), x=s_mesh)
    c4 = (2.0 * a_sq / sin_wt) * simpson(xbar * np.sin(w * (t - s_mesh)), x=s_mesh)
    inner_vals = xbar * np.sin(w * s_mesh)
    # cumulative_simpson casts complex input to real; integrate parts separately
    inner = (cumulative_simpson(inner_vals.real, x=s_mesh, initial=0.0)
             + 1j * cumulative_simpson(inner_vals.imag, x=s_mesh, initial=0.0))
    outer = simpson(xbar * np.sin(w * (t - s_mesh)) * inner, x=s_mesh)
    c5 = (4.0j * scales.hbar * a_sq / (m * w * sin_wt)) * outer
    return KernelCoeffs(c1=complex(c1), c2=complex(c2), c3=complex(c3),
                        c4=complex(c4), c5=complex(c5), omega=complex(w), t=t)


def path_action(path: DrivingPath, scales: DerivedScales) -> float:
    """The constant -a^2 integral of xbar^2 appearing alongside c5."""
    s_mesh = path.mesh
    return float(-scales.a_sq * simpson(path.samples**2, x=s_mesh))


def kbar_quadratic_kernel(coeffs: KernelCoeffs, scales: DerivedScales, constant: complex = 0.0):
    """The driven kernel as a quadratic-exponent kernel usable by the exact
    Gaussian calculus."""
    from .gaussians import QuadraticKernel1D

    ih = 1j / scales.hbar
    return QuadraticKernel1D(
        kff=ih * coeffs.c1, k00=ih * coeffs.c1, kf0=ih * coeffs.c2,
        kf=coeffs.c3, k0=coeffs.c4, kc=coeffs.c5 + constant,
    )


def pq_from_c3(c: KernelCoeffs, scales: DerivedScales):
    """Phase-space center selected by a driving path."""
    from .gaussians import CoherentStateParams

    q = (scales.hbar / (scales.m * scales.alpha)) * c.c3.real
    p = scales.hbar * (c.c3.real + c.c3.imag)
    return CoherentStateParams(p=p, q=q)


# ---------------------------------------------------------------------------
# the Wigner-function propagator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WignerKernel:
    """Green function of the classical momentum-diffusion equation, peaked on
    the free-streaming line q = q0 + p0 t / m."""

    t: float
    mu: float
    nu: float
    sig: float
    D: float
    m: float

    def exponent(self, p, q, p0, q0):
        dp = np.asarray(p) - np.asarray(p0)
        u = np.asarray(q) - np.asarray(q0) - np.asarray(p0) * self.t / self.m
        return -self.mu * dp**2 - self.nu * u**2 + self.sig * dp * u


def wigner_kernel(t: float, scales: DerivedScales) -> WignerKernel:
    if not t > 0:
        raise DomainError(f"Wigner kernel needs t > 0, got {t}")
    D = scales.D
    m = scales.m
    return WignerKernel(t=t, mu=1.0 / (D * t), nu=3.0 * m**2 / (D * t**3),
                        sig=3.0 * m / (D * t**2), D=D, m=m)


# ---------------------------------------------------------------------------
# the phase-space weight kernel f(p, q, t | x_0, y_0)
# ---------------------------------------------------------------------------

def _f_exponent_pieces(t: float, scales: DerivedScales, exact: bool):
    """Coefficients of the xi-quadratic exponent as functions of
    (p, q, X0, xi0); `exact` keeps the subdominant second-exponential terms."""
    m, hbar, alpha = scales.m, scales.hbar, scales.alpha
    mu0 = m / (hbar * t)
    k3 = 2.0 * m * alpha**2 * t / (3.0 * hbar)
    g = m * alpha / (4.0 * hbar)
    r = 1.0 / (alpha * t)
    if exact:
        A = -k3 + g * (1.0 + (1.0 - r) ** 2)
        b_xi = -k3 + 2.0 * g * (1.0 - r) * r
        c_xixi = -k3 + g * r * r
    else:
        A = -k3
        b_xi = -k3
        c_xixi = -k3
    return {"A": A, "mu0": mu0, "b_xi": b_xi, "c_xixi": c_xixi}


def f_kernel_min_alpha_t(scales: DerivedScales, exact: bool = True) -> float:
    """Smallest alpha*t for which the xi integral converges (bisection on the
    sign of the quadratic coefficient)."""
    lo, hi = 1e-3, 10.0
    def coef(at):
        return _f_exponent_pieces(at / scales.alpha, scales, exact)["A"]
    if coef(hi) >= 0:
        return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if coef(mid) < 0:
            hi = mid
        else:
            lo = mid
    return hi


def f_kernel(p, q, x_0, y_0, t: float, scales: DerivedScales, exact: bool = True):
    """Closed-form xi integral of the weight kernel; `exact=False` gives the
    large-alpha-t approximation (the Wigner transform of J)."""
    pieces = _f_exponent_pieces(t, scales, exact)
    A = pieces["A"]
    if not A.real < 0:
        raise DomainError(
            f"xi integral diverges at alpha*t = {scales.alpha * t:.3g}; "
            f"needs alpha*t > {f_kernel_min_alpha_t(scales, exact):.3g}")
    hbar = scales.hbar
    mu0 = pieces["mu0"]
    X0 = 0.5 * (np.asarray(x_0) + np.asarray(y_0))
    xi0 = np.asarray(x_0) - np.asarray(y_0)
    B = -1j * np.asarray(p) / hbar + 1j * mu0 * (np.asarray(q) - X0) + pieces["b_xi"] * xi0
    C = -1j * mu0 * (np.asarray(q) - X0) * xi0 + pieces["c_xixi"] * xi0**2
    return np.sqrt(np.pi / (-A)) * np.exp(C - B * B / (4.0 * A))


def f_from_density_form(form: DensityForm, pgrid: np.ndarray, qgrid: np.ndarray,
                        t: float, scales: DerivedScales, exact: bool = True) -> np.ndarray:
    """Fold the weight kernel analytically into a Gaussian density form;
    returns un-normalized real values on the (p, q) grid."""
    pieces = _f_exponent_pieces(t, scales, exact)
    A = pieces["A"]
    if not A.real < 0:
        raise DomainError(
            f"xi integral diverges at alpha*t = {scales.alpha * t:.3g}; "
            f"needs alpha*t > {f_kernel_min_alpha_t(scales, exact):.3g}")
    hbar = scales.hbar
    mu0 = pieces["mu0"]
    b_xi = pieces["b_xi"]
    c_xixi = pieces["c_xixi"]
    # (X0, xi0) -> (x0, y0): X0 = (x0+y0)/2, xi0 = x0-y0
    # exponent: c_Xxi X0 xi0 + c_q(q) xi0 + c_xixi xi0^2 - B^2/(4A)
    # with B = b0(p, q) + b_X X0 + b_xi xi0
    b_X = -1j * mu0
    c_Xxi = 1j * mu0
    P, Q = np.meshgrid(pgrid, qgrid, indexing="ij")
    b0 = -1j * P / hbar + 1j * mu0 * Q
    out = np.zeros(P.shape, dtype=complex)
    # quadratic form in u = (X0, xi0):  u S u /2 + w.u + c
    S_f = np.array([
        [-2.0 * b_X * b_X / (4.0 * A), c_Xxi - 2.0 * b_X * b_xi / (4.0 * A)],
        [c_Xxi - 2.0 * b_X * b_xi / (4.0 * A), 2.0 * c_xixi - 2.0 * b_xi * b_xi / (4.0 * A)],
    ], dtype=complex)
    # transform to (x0, y0): u = T z0, T = [[1/2, 1/2], [1, -1]]
    T = np.array([[0.5, 0.5], [1.0, -1.0]])
    for term in form.terms:
        S = T.T @ S_f @ T + term.M
        negS = -S.real
        if not (negS[0, 0] > 0 and np.linalg.det(negS) > 0):
            raise DomainError("source fold diverges; increase alpha*t")
        Sinv = np.linalg.inv(S)
        det = (-S[0, 0]) * (-S[1, 1]) - S[0, 1] * S[1, 0]
        # linear part in u: -i mu0 Q on the xi0 slot plus the B^2 cross terms
        wX = -2.0 * b0 * b_X / (4.0 * A)
        wxi = -1j * mu0 * Q - 2.0 * b0 * b_xi / (4.0 * A)
        # w in z0 coords: w_z = T^T w_u + term.b
        wz0 = 0.5 * wX + wxi + term.b[0]
        wz1 = 0.5 * wX - wxi + term.b[1]
        cc = term.c - b0 * b0 / (4.0 * A)
        quad = (Sinv[0, 0] * wz0 * wz0 + (Sinv[0, 1] + Sinv[1, 0]) * wz0 * wz1
                + Sinv[1, 1] * wz1 * wz1)
        out += (2.0 * math.pi / cmath.sqrt(det)) * np.exp(cc - 0.5 * quad)
    pref = np.sqrt(np.pi / (-A))
    return (pref * out).real


def f_inversion_from_density_form(form: DensityForm, pgrid: np.ndarray, qgrid: np.ndarray,
                                  scales: DerivedScales) -> np.ndarray:
    """The formal inversion of the diagonal representation applied to an
    evolved Gaussian density form.  The center-of-mass integral runs along
    the imaginary axis and is done analytically together with the real
    separation integral (2D complex Gaussian); un-normalized real values."""
    m, hbar, alpha = scales.m, scales.hbar, scales.alpha
    # u = (Y, xi), X = q + iY
    S_inv = np.array([[-2.0 * m * alpha / hbar, m * alpha / hbar],
                      [m * alpha / hbar, m * alpha / (2.0 * hbar)]], dtype=complex)
    G = np.array([[1j, 0.5], [1j, -0.5]], dtype=complex)
    P, Q = np.meshgrid(pgrid, qgrid, indexing="ij")
    out = np.zeros(P.shape, dtype=complex)
    for term in form.terms:
        S = S_inv + G.T @ term.M @ G
        negS = -S.real
        if not (negS[0, 0] > 0 and np.linalg.det(negS) > 0):
            raise DomainError("inversion integral diverges; increase alpha*t")
        Sinv = np.linalg.inv(S)
        det = (-S[0, 0]) * (-S[1, 1]) - S[0, 1] * S[1, 0]
        sumM = term.M[0, 0] + term.M[1, 1] + term.M[0, 1] + term.M[1, 0]
        sumb = term.b[0] + term.b[1]
        cc = term.c + 0.5 * sumM * Q**2 + sumb * Q
        # linear coefficient: G^T (M.(q,q) + b) plus -ip/hbar on the xi slot
        lin0 = (term.M[0, 0] + term.M[0, 1]) * Q + term.b[0]
        lin1 = (term.M[1, 0] + term.M[1, 1]) * Q + term.b[1]
        w0 = G[0, 0] * lin0 + G[1, 0] * lin1
        w1 = G[0, 1] * lin0 + G[1, 1] * lin1 - 1j * P / hbar
        quad = (Sinv[0, 0] * w0 * w0 + (Sinv[0, 1] + Sinv[1, 0]) * w0 * w1
                + Sinv[1, 1] * w1 * w1)
        out += (2.0 * math.pi / cmath.sqrt(det)) * np.exp(cc - 0.5 * quad)
    return out.real


# ---------------------------------------------------------------------------
# analytic Wigner transform of a Gaussian density form
# ---------------------------------------------------------------------------

def wigner_of_density_form(form: DensityForm, pgrid: np.ndarray, qgrid: np.ndarray) -> np.ndarray:
    """W(p, q) of a sum of bilinear Gaussian terms, exactly (closed-form xi
    integral); real values on the (p, q) grid, 1/(2 pi hbar) normalization."""
    hbar = form.hbar
    Tm = np.array([[1.0, 0.5], [1.0, -0.5]])
    P, Q = np.meshgrid(pgrid, qgrid, indexing="ij")
    out = np.zeros(P.shape, dtype=complex)
    for term in form.terms:
        N = Tm.T @ term.M @ Tm
        bq, bxi = Tm.T @ term.b
        if not N[1, 1].real < 0:
            raise DomainError("term has divergent separation integral")
        # exponent: N00 q^2/2 + N01 q xi + N11 xi^2/2 + bq q + bxi xi + c - i p xi/hbar
        lin = bxi + 0.5 * (N[0, 1] + N[1, 0]) * Q - 1j * P / hbar
        cc = 0.5 * N[0, 0] * Q**2 + bq * Q + term.c
        out += np.sqrt(2.0 * np.pi / (-N[1, 1])) * np.exp(cc - lin * lin / (2.0 * N[1, 1]))
    return out.real / (2.0 * math.pi * hbar)
