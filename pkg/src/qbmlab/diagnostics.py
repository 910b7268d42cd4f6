"""Residual checks against the governing equations and decoherence-rate
measurements.

The density-matrix evolution law:
    d rho/dt = (i hbar/2m)(d^2/dx^2 - d^2/dy^2) rho - (a^2/2)(x-y)^2 rho.
The phase-space weight equation:
    df/dt = -(p/m) df/dq + 2 m gamma kT d^2f/dp^2
            + sqrt(hbar gamma kT) d^2f/dpdq + (hbar/2m) d^2f/dq^2,
whose first two terms alone govern the Wigner function at late times.

Time derivatives are central differences; spatial derivatives use
4th-order central stencils; residuals are reported relative to the
time-derivative norm."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gaussians import GaussianState, density_from_state
from .kernels import propagate_density_form
from .model import DerivedScales
from .phasespace import DensityGrid, PhaseGrid

_TRIM = 2  # edge points lost to the 4th-order stencils


@dataclass(frozen=True)
class ResidualReport:
    """L2 residual of a PDE check, relative to the time-derivative norm."""

    operator: str
    time: float
    l2_residual: float
    relative_residual: float
    spacings: dict
    stencil_orders: dict
    extra_term_fraction: float | None = None

    def to_json(self) -> str:
        d = {"operator": self.operator, "time": self.time,
             "l2_residual": self.l2_residual,
             "relative_residual": self.relative_residual,
             "spacings": self.spacings, "stencil_orders": self.stencil_orders}
        if self.extra_term_fraction is not None:
            d["extra_term_fraction"] = self.extra_term_fraction
        return json.dumps(d)


def _d1_4th(g: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order first derivative on the interior (trimmed output)."""
    s = [slice(_TRIM, -_TRIM)] * g.ndim

    def sl(off):
        t = list(s)
        t[axis] = slice(_TRIM + off, g.shape[axis] - _TRIM + off or None)
        return g[tuple(t)]

    return (-sl(2) + 8.0 * sl(1) - 8.0 * sl(-1) + sl(-2)) / (12.0 * h)


def _d2_4th(g: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order second derivative on the interior (trimmed output)."""
    s = [slice(_TRIM, -_TRIM)] * g.ndim

    def sl(off):
        t = list(s)
        t[axis] = slice(_TRIM + off, g.shape[axis] - _TRIM + off or None)
        return g[tuple(t)]

    return (-sl(2) + 16.0 * sl(1) - 30.0 * sl(0) + 16.0 * sl(-1) - sl(-2)) / (12.0 * h * h)


def _trim2(g: np.ndarray) -> np.ndarray:
    return g[_TRIM:-_TRIM, _TRIM:-_TRIM]


def _l2(g: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.abs(g) ** 2)))


def master_residual(rho_minus: DensityGrid, rho_0: DensityGrid, rho_plus: DensityGrid,
                    h_t: float, scales: DerivedScales, time: float = 0.0) -> ResidualReport:
    """Central-difference d rho/dt minus the evolution-law right-hand side."""
    for r in (rho_minus, rho_plus):
        if r.x.shape != rho_0.x.shape or not np.array_equal(r.x, rho_0.x):
            raise DomainError("residual needs three matched grids")
    if not h_t > 0:
        raise DomainError(f"needs h_t > 0, got {h_t}")
    x = rho_0.x
    h = rho_0.h
    dt_rho = _trim2((rho_plus.values - rho_minus.values) / (2.0 * h_t))
    v = rho_0.values
    kin = (1j * scales.hbar / (2.0 * scales.m)) * (_d2_4th(v, h, 0) - _d2_4th(v, h, 1))
    X, Y = np.meshgrid(x, x, indexing="ij")
    damp = -0.5 * scales.a_sq * _trim2((X - Y) ** 2 * v)
    resid = dt_rho - kin - damp
    denom = _l2(dt_rho)
    return ResidualReport(
        operator="density-evolution", time=time,
        l2_residual=_l2(resid),
        relative_residual=_l2(resid) / denom if denom > 0 else math.inf,
        spacings={"x": h, "t": h_t},
        stencil_orders={"t": 2, "x": 4},
    )


def fokker_planck_residual(g_minus: PhaseGrid, g_0: PhaseGrid, g_plus: PhaseGrid,
                           which: str, scales: DerivedScales,
                           h_t: float, time: float = 0.0) -> ResidualReport:
    """Residual of the phase-space weight equation ('f-equation') or its
    late-time truncation ('W-equation'); for the f-equation the two
    subdominant terms are also reported as a fraction of the dominant
    momentum-diffusion term."""
    if which not in ("f-equation", "W-equation"):
        raise DomainError(f"unknown equation {which!r}")
    for g in (g_minus, g_plus):
        if (g.p.shape != g_0.p.shape or g.q.shape != g_0.q.shape
                or not np.array_equal(g.p, g_0.p) or not np.array_equal(g.q, g_0.q)):
            raise DomainError("residual needs three matched grids")
    if not h_t > 0:
        raise DomainError(f"needs h_t > 0, got {h_t}")
    hp = float(g_0.p[1] - g_0.p[0])
    hq = float(g_0.q[1] - g_0.q[0])
    v = g_0.values
    dt_g = _trim2((g_plus.values - g_minus.values) / (2.0 * h_t))
    P = g_0.p[_TRIM:-_TRIM, None]
    drift = -(P / scales.m) * _d1_4th(v, hq, 1)
    diff = scales.D * _d2_4th(v, hp, 0)
    rhs = drift + diff
    extra_fraction = None
    if which == "f-equation":
        # cross coefficient sqrt(hbar gamma kT) = hbar alpha: fitting the
        # moment identities of the exact weight distribution pins this value
        # (d sigma_pq / dt - sigma_pp / m) to four digits
        gamma_kT = scales.hbar * scales.alpha**2
        cross = math.sqrt(scales.hbar * gamma_kT) * _d1_4th(_d1_4th_full(v, hp, 0), hq, 1)
        qdiff = (scales.hbar / (2.0 * scales.m)) * _d2_4th(v, hq, 1)
        rhs = rhs + cross + qdiff
        dnorm = _l2(diff)
        extra_fraction = (_l2(cross + qdiff) / dnorm) if dnorm > 0 else math.inf
    resid = dt_g - rhs
    denom = _l2(dt_g)
    return ResidualReport(
        operator=which, time=time,
        l2_residual=_l2(resid),
        relative_residual=_l2(resid) / denom if denom > 0 else math.inf,
        spacings={"p": hp, "q": hq, "t": h_t},
        stencil_orders={"t": 2, "p": 4, "q": 4},
        extra_term_fraction=extra_fraction,
    )


def _d1_4th_full(g: np.ndarray, h: float, axis: int) -> np.ndarray:
    """4th-order first derivative keeping the full shape (edges zero), so a
    second stencil can be applied along the other axis."""
    out = np.zeros_like(g)
    sl = [slice(None)] * g.ndim

    def shifted(off):
        t = list(sl)
        t[axis] = slice(_TRIM + off, g.shape[axis] - _TRIM + off or None)
        return g[tuple(t)]

    mid = list(sl)
    mid[axis] = slice(_TRIM, -_TRIM)
    out[tuple(mid)] = (-shifted(2) + 8.0 * shifted(1)
                       - 8.0 * shifted(-1) + shifted(-2)) / (12.0 * h)
    return out


@dataclass(frozen=True)
class DecoherenceFit:
    """Exponential fit of the normalized interference-peak magnitude."""

    rate: float
    ell: float
    constant: float      # rate / (a^2 ell^2)
    window: tuple
    log_values: tuple


def coherence_ratio(state_or_form, t: float, scales: DerivedScales, ell: float) -> float:
    """|rho_t(l/2, -l/2)| / sqrt(rho_t(l/2, l/2) rho_t(-l/2, -l/2)): the
    off-diagonal peak normalized so free spreading cancels."""
    form = state_or_form
    if isinstance(form, GaussianState):
        form = density_from_state(form.normalized())
    if t > 0:
        form = propagate_density_form(form, t, scales)
    off = abs(complex(form(ell / 2.0, -ell / 2.0)))
    d1 = complex(form(ell / 2.0, ell / 2.0)).real
    d2 = complex(form(-ell / 2.0, -ell / 2.0)).real
    return off / math.sqrt(d1 * d2)


def decoherence_rate(state: GaussianState, t_list, scales: DerivedScales,
                     ell: float) -> DecoherenceFit:
    """Least-squares slope of log coherence ratio over the early window;
    returns the decay rate and the measured constant rate/(a^2 l^2)."""
    if len(state.components) < 2:
        raise DomainError("decoherence fit needs a superposition (>= 2 components)")
    t_arr = np.asarray(list(t_list), dtype=float)
    if len(t_arr) < 2 or np.any(np.diff(t_arr) <= 0) or t_arr[0] < 0:
        raise DomainError("needs >= 2 increasing, non-negative times")
    logs = np.array([math.log(coherence_ratio(state, t, scales, ell)) for t in t_arr])
    slope = np.polyfit(t_arr, logs, 1)[0]
    rate = -float(slope)
    denom = scales.a_sq * ell * ell
    constant = rate / denom if denom > 0 else math.nan
    return DecoherenceFit(rate=rate, ell=ell, constant=constant,
                          window=(float(t_arr[0]), float(t_arr[-1])),
                          log_values=tuple(float(v) for v in logs))


def decoherence_window(scales: DerivedScales, ell: float, n: int = 9) -> np.ndarray:
    """Early-time fit window: two decoherence times hbar^2/(l^2 m gamma kT),
    sampled uniformly (excluding t=0 where the propagator is singular)."""
    gamma_kT = scales.hbar * scales.alpha**2
    t_dec = scales.hbar**2 / (ell**2 * scales.m * gamma_kT)
    return np.linspace(t_dec / n, 2.0 * t_dec, n)
