"""Exact complex-Gaussian wavefunction algebra.

States are superpositions of components A exp(-(L/2)(x-q0)^2 + i p0 x / hbar)
and are kept un-normalized; norms are applied at observable extraction.
Quadratic-exponent kernels map components to components in closed form, so
this module provides machine-precision oracles for every grid route.

Densities of pure states are sums of bilinear Gaussian forms
exp(z^T M z / 2 + b.z + c) in z = (x, y); the same representation is closed
under the density-matrix propagator (see kernels.propagate_density_form).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import DerivedScales


@dataclass(frozen=True)
class CoherentStateParams:
    p: float
    q: float


@dataclass(frozen=True)
class GaussianComponent:
    """One Gaussian piece psi(x) = A exp(-(L/2)(x - q0)^2 + i p0 x / hbar)."""

    A: complex
    q0: float
    L: complex  # width parameter, Re L > 0
    p0: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.L.real > 0.0:
            raise DomainError(f"width parameter must have Re L > 0, got {self.L}")

    def __call__(self, x):
        return self.A * np.exp(-(self.L / 2.0) * (x - self.q0) ** 2 + 1j * self.p0 * x / self.hbar)

    def norm_sq(self) -> float:
        return abs(self.A) ** 2 * math.sqrt(math.pi / self.L.real)

    def exponent_coeffs(self) -> tuple[complex, complex, complex]:
        """(a2, a1, a0) with psi(x) = exp(a2 x^2 + a1 x + a0)."""
        a2 = -self.L / 2.0
        a1 = self.L * self.q0 + 1j * self.p0 / self.hbar
        a0 = -self.L * self.q0**2 / 2.0 + cmath.log(self.A)
        return a2, a1, a0


@dataclass(frozen=True)
class GaussianState:
    """Ordered superposition of Gaussian components."""

    components: tuple[GaussianComponent, ...]

    def __post_init__(self):
        if len(self.components) == 0:
            raise DomainError("GaussianState needs at least one component")

    @property
    def hbar(self) -> float:
        return self.components[0].hbar

    def __call__(self, x):
        out = self.components[0](x)
        for c in self.components[1:]:
            out = out + c(x)
        return out

    def norm_sq(self) -> float:
        total = 0.0 + 0.0j
        for a in self.components:
            for b in self.components:
                total += overlap(a, b)
        if not (total.real > 0.0):
            raise DomainError("state has non-positive norm^2")
        return total.real

    def normalized(self) -> "GaussianState":
        s = 1.0 / math.sqrt(self.norm_sq())
        return GaussianState(tuple(
            GaussianComponent(c.A * s, c.q0, c.L, c.p0, c.hbar) for c in self.components
        ))

    def to_json(self) -> str:
        return json.dumps([
            {"re_A": c.A.real, "im_A": c.A.imag, "q0": c.q0,
             "re_L": c.L.real, "im_L": c.L.imag, "p0": c.p0}
            for c in self.components
        ])

    @staticmethod
    def from_json(text: str, hbar: float = 1.0) -> "GaussianState":
        items = json.loads(text)
        return GaussianState(tuple(
            GaussianComponent(complex(d["re_A"], d["im_A"]), d["q0"],
                              complex(d["re_L"], d["im_L"]), d["p0"], hbar)
            for d in items
        ))


def coherent_state(params: CoherentStateParams, scales: DerivedScales) -> GaussianComponent:
    """Unit-norm phase-space localized Gaussian with complex width
    (m alpha / hbar)(1 - i), centered at (p, q).  Satisfies
    Delta_x Delta_p = hbar / sqrt(2)."""
    L = (scales.m * scales.alpha / scales.hbar) * (1.0 - 1.0j)
    A = (L.real / math.pi) ** 0.25
    return GaussianComponent(A=complex(A), q0=params.q, L=L, p0=params.p, hbar=scales.hbar)


def cat_state(ell: float, scales: DerivedScales, p: float = 0.0) -> GaussianState:
    """Even superposition of two coherent states a distance ell apart."""
    a = coherent_state(CoherentStateParams(p=p, q=-ell / 2.0), scales)
    b = coherent_state(CoherentStateParams(p=p, q=+ell / 2.0), scales)
    return GaussianState((a, b)).normalized()


def _gauss_integral(a2: complex, a1: complex, a0: complex) -> complex:
    """integral exp(a2 x^2 + a1 x + a0) dx over the real line, Re a2 < 0."""
    if not (a2.real < 0.0):
        raise DomainError(f"divergent Gaussian integral: Re a2 = {a2.real} >= 0")
    return cmath.sqrt(math.pi / (-a2)) * cmath.exp(a0 - a1 * a1 / (4.0 * a2))


def overlap(a: GaussianComponent, b: GaussianComponent) -> complex:
    """<a|b> = integral conj(a)(x) b(x) dx in closed form."""
    a2a, a1a, a0a = a.exponent_coeffs()
    b2, b1, b0 = b.exponent_coeffs()
    return _gauss_integral(a2a.conjugate() + b2, a1a.conjugate() + b1, a0a.conjugate() + b0)


def moments(state: GaussianState) -> dict:
    """<x>, <p>, Delta_x, Delta_p of a (possibly unnormalized) state, exactly.

    Uses d/dx ladder on the closed-form overlap integrals."""
    hbar = state.hbar
    n2 = 0.0j
    mx = 0.0j
    mx2 = 0.0j
    mp = 0.0j
    mp2 = 0.0j
    for ca in state.components:
        a2a, a1a, a0a = ca.exponent_coeffs()
        for cb in state.components:
            b2, b1, b0 = cb.exponent_coeffs()
            A2 = a2a.conjugate() + b2
            A1 = a1a.conjugate() + b1
            A0 = a0a.conjugate() + b0
            if not A2.real < 0:
                raise DomainError("non-normalizable component pair")
            # moments of exp(A2 x^2 + A1 x + A0)
            I0 = _gauss_integral(A2, A1, A0)
            mu = -A1 / (2.0 * A2)
            var = -1.0 / (2.0 * A2)
            I1 = mu * I0
            I2 = (mu * mu + var) * I0
            I3 = (mu**3 + 3.0 * mu * var) * I0
            n2 += I0
            mx += I1
            mx2 += I2
            # p psi_b = -i hbar psi_b' = -i hbar (2 b2 x + b1) psi_b
            mp += -1j * hbar * (2.0 * b2 * I1 + b1 * I0)
            # p^2 psi_b = -hbar^2 [ (2 b2 x + b1)^2 + 2 b2 ] psi_b
            mp2 += -(hbar**2) * (4.0 * b2 * b2 * I2 + 4.0 * b2 * b1 * I1
                                 + (b1 * b1 + 2.0 * b2) * I0)
    n = n2.real
    ex = (mx / n).real
    ep = (mp / n).real
    vx = (mx2 / n).real - ex * ex
    vp = (mp2 / n).real - ep * ep
    return {"x": ex, "p": ep, "dx": math.sqrt(max(vx, 0.0)), "dp": math.sqrt(max(vp, 0.0))}


@dataclass(frozen=True)
class QuadraticKernel1D:
    """Propagation kernel K(x_f, x_0) = exp(kff x_f^2 + k00 x_0^2
    + kf0 x_f x_0 + kf x_f + k0 x_0 + kc)."""

    kff: complex
    k00: complex
    kf0: complex
    kf: complex = 0.0
    k0: complex = 0.0
    kc: complex = 0.0


def free_kernel(t: float, m: float = 1.0, hbar: float = 1.0) -> QuadraticKernel1D:
    """Free-particle propagator exponent (prefactor dropped)."""
    if not t > 0:
        raise DomainError(f"free kernel needs t > 0, got {t}")
    c = 1j * m / (2.0 * hbar * t)
    return QuadraticKernel1D(kff=c, k00=c, kf0=-2.0 * c)


def apply_gaussian_kernel(state: GaussianState, kernel: QuadraticKernel1D) -> GaussianState:
    """psi_out(x_f) = integral K(x_f, x_0) psi(x_0) dx_0, component by
    component in closed form (Gaussian closure: the count never changes).

    The square-root prefactor uses the principal branch; it is continuous
    because convergence forces the x_0 Gaussian coefficient into the
    right half plane."""
    out = []
    for j, comp in enumerate(state.components):
        a2, a1, a0 = comp.exponent_coeffs()
        c2 = kernel.k00 + a2           # x_0^2
        if not (c2.real < 0.0):
            raise DomainError(f"kernel x_0 integral diverges for component {j}: Re coeff = {c2.real}")
        c1 = kernel.k0 + a1            # x_0, plus kf0 * x_f handled analytically:
        # x_0 integral of exp(c2 x0^2 + (c1 + kf0 xf) x0) =
        #   sqrt(pi/-c2) exp(-(c1 + kf0 xf)^2 / (4 c2))
        pref = cmath.sqrt(math.pi / (-c2))
        Qf = kernel.kff - kernel.kf0**2 / (4.0 * c2)
        Lf = kernel.kf - 2.0 * c1 * kernel.kf0 / (4.0 * c2)
        Cf = kernel.kc + a0 - c1 * c1 / (4.0 * c2) + cmath.log(pref)
        Lnew = -2.0 * Qf
        if not (Lnew.real > 0.0):
            raise DomainError(f"kernel output is non-normalizable for component {j}")
        q0 = Lf.real / Lnew.real
        p0 = state.hbar * (Lf.imag - Lnew.imag * q0)
        A = cmath.exp(Cf + Lnew * q0 * q0 / 2.0)
        out.append(GaussianComponent(A=A, q0=q0, L=Lnew, p0=p0, hbar=state.hbar))
    return GaussianState(tuple(out))


# ---------------------------------------------------------------------------
# bilinear Gaussian forms for density matrices rho(x, y)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianPair:
    """One term exp(z^T M z / 2 + b.z + c) with z = (x, y)."""

    M: np.ndarray  # (2, 2) complex, symmetric
    b: np.ndarray  # (2,) complex
    c: complex

    def __call__(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        M, b = self.M, self.b
        expo = (0.5 * (M[0, 0] * x * x + M[1, 1] * y * y) + M[0, 1] * x * y
                + b[0] * x + b[1] * y + self.c)
        return np.exp(expo)

    def scaled(self, log_factor: complex) -> "GaussianPair":
        return GaussianPair(self.M, self.b, self.c + log_factor)


@dataclass(frozen=True)
class DensityForm:
    """rho(x, y) = sum of GaussianPair terms; Hermitian by construction when
    built from a pure state and preserved by Hermitian propagators."""

    terms: tuple[GaussianPair, ...]
    hbar: float = 1.0

    def __call__(self, x, y):
        out = self.terms[0](x, y)
        for t in self.terms[1:]:
            out = out + t(x, y)
        return out

    def trace(self) -> complex:
        total = 0.0j
        for t in self.terms:
            a2 = 0.5 * (t.M[0, 0] + t.M[1, 1]) + t.M[0, 1]
            a1 = t.b[0] + t.b[1]
            total += _gauss_integral(a2, a1, t.c)
        return total

    def normalized(self) -> "DensityForm":
        tr = self.trace()
        if not tr.real > 0:
            raise DomainError("density form has non-positive trace")
        shift = -cmath.log(tr.real)
        return DensityForm(tuple(t.scaled(shift) for t in self.terms), self.hbar)

    def evaluate_grid(self, x: np.ndarray) -> np.ndarray:
        X, Y = np.meshgrid(x, x, indexing="ij")
        return self(X, Y)


def density_from_state(state: GaussianState) -> DensityForm:
    """rho(x, y) = psi(x) conj(psi)(y) as a sum of bilinear Gaussian terms."""
    terms = []
    for cj in state.components:
        a2j, a1j, a0j = cj.exponent_coeffs()
        for ck in state.components:
            a2k, a1k, a0k = ck.exponent_coeffs()
            M = np.array([[2.0 * a2j, 0.0], [0.0, 2.0 * a2k.conjugate()]], dtype=complex)
            b = np.array([a1j, a1k.conjugate()], dtype=complex)
            terms.append(GaussianPair(M, b, a0j + a0k.conjugate()))
    return DensityForm(tuple(terms), state.hbar)


def gauss2d_integral(S: np.ndarray, w: np.ndarray, c: complex) -> complex:
    """integral over R^2 of exp(u^T S u / 2 + w.u + c).

    Requires the real part of -S to be positive definite."""
    negS = -S.real
    if not (negS[0, 0] > 0 and np.linalg.det(negS) > 0):
        raise DomainError("divergent 2D Gaussian integral")
    Sinv = np.linalg.inv(S)
    # principal-branch sqrt of det(-S); the positive-definite real part keeps
    # the determinant phase inside (-pi, pi), away from the cut
    det = (-S[0, 0]) * (-S[1, 1]) - S[0, 1] * S[1, 0]
    pref = 2.0 * math.pi / cmath.sqrt(det)
    return pref * cmath.exp(c - 0.5 * (w @ Sinv @ w))
