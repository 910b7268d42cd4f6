"""Stochastic pure-state unravelling of the open-system dynamics.

Normalized wavefunctions evolve by a nonlinear Ito equation: kinetic drift
-(i/hbar) p^2/2m, plus localization drift -(1/2)(L - <L>)^2 dt and noise
(L - <L>) dxi with L = a x_hat and dxi a complex Wiener increment.  The
ensemble mean of |psi><psi| recovers the density-matrix evolution.

Integration: Crank-Nicolson for the kinetic term (unconditionally stable,
norm-preserving to round-off) composed with an exact exponential update of
the diagonal localization/noise part, then renormalization.  Weak first
order in dt overall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import DomainError, PreconditionError
from .gaussians import GaussianState
from .model import DerivedScales
from .phasespace import DensityGrid

LEAK_TOL = 1e-8


@dataclass(frozen=True)
class WienerIncrement:
    """Complex noise increment dxi = (u + iv) sqrt(dt/2) with u, v standard
    normals, so E[dxi conj(dxi)] = dt, E[dxi^2] = 0, E[dxi] = 0."""

    dxi: complex
    dt: float


def wiener_increment(rng: np.random.Generator, dt: float) -> WienerIncrement:
    u, v = rng.standard_normal(2)
    return WienerIncrement(dxi=complex(u, v) * math.sqrt(dt / 2.0), dt=dt)


def observables(psi: np.ndarray, x: np.ndarray, hbar: float = 1.0) -> dict:
    """<x>, <p>, Delta_x, Delta_p of a grid wavefunction.

    Position moments by quadrature; momentum moments from the discrete
    Fourier spectrum.  The wavefunction vanishes at the box edges, so the
    periodic spectrum stays accurate at all momenta -- unlike
    finite-difference stencils, which misestimate p^2 badly once the centre
    momentum approaches the grid scale."""
    h = float(x[1] - x[0])
    dens = np.abs(psi) ** 2
    w = float(np.sum(dens) * h)
    x_mean = float(np.sum(x * dens) * h / w)
    x2 = float(np.sum(x * x * dens) * h / w)
    spec = np.abs(np.fft.fft(psi)) ** 2
    spec /= spec.sum()
    p = hbar * 2.0 * math.pi * np.fft.fftfreq(len(x), d=h)
    p_mean = float(np.sum(p * spec))
    p2 = float(np.sum(p * p * spec))
    return {"x": x_mean, "p": p_mean,
            "dx": math.sqrt(max(x2 - x_mean**2, 0.0)),
            "dp": math.sqrt(max(p2 - p_mean**2, 0.0))}


@dataclass
class TrajectoryState:
    """One normalized pure state on a uniform grid at time t."""

    psi: np.ndarray
    x: np.ndarray
    t: float
    rng_seed: int

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.psi) ** 2) * self.h))

    def normalized(self) -> "TrajectoryState":
        return TrajectoryState(self.psi / self.norm(), self.x, self.t, self.rng_seed)

    def observables(self) -> dict:
        return observables(self.psi, self.x, hbar=1.0)


def dt_bound(scales: DerivedScales, x: np.ndarray, dt: float) -> float:
    """Largest admissible step for the grid and parameters: the kinetic
    accuracy bound 0.2 m h^2 / hbar and the localization bound
    0.1 / (alpha max(1, a^2 x_max^2 dt))."""
    h = float(x[1] - x[0])
    kinetic = 0.2 * scales.m * h * h / scales.hbar
    x_max = float(np.max(np.abs(x)))
    if scales.alpha == 0.0:  # closed-system limit: only the kinetic bound
        return kinetic
    local = 0.1 / (scales.alpha * max(1.0, scales.a_sq * x_max**2 * dt))
    return min(kinetic, local)


def _check_dt(scales: DerivedScales, x: np.ndarray, dt: float) -> None:
    if not dt > 0:
        raise DomainError(f"step needs dt > 0, got {dt}")
    bound = dt_bound(scales, x, dt)
    if dt > bound:
        raise DomainError(f"dt = {dt:.3g} exceeds the stability bound {bound:.3g}; "
                          f"suggested dt = {0.5 * bound:.3g}")


def _state_on_grid(psi0, x: np.ndarray) -> np.ndarray:
    if isinstance(psi0, GaussianState):
        vals = psi0.normalized()(x)
    else:
        vals = np.asarray(psi0, dtype=complex)
        if vals.shape != x.shape:
            raise DomainError("initial wavefunction does not match the grid")
    h = x[1] - x[0]
    return vals / math.sqrt(np.sum(np.abs(vals) ** 2).real * h)


def suggested_grid(scales: DerivedScales, ell: float, t_final: float,
                   n: int | None = None) -> np.ndarray:
    """Grid box keeping diffusing trajectory centres at least five packet
    widths from the edge over [0, t_final]; spacing resolves the localized
    packet width (h ~ width/5) when n is not given."""
    width = math.sqrt(scales.hbar / (2.0 * scales.m * scales.alpha))
    var_p = 2.0 * scales.D * t_final
    var_q = var_p * t_final**2 / (3.0 * scales.m**2)
    half = 0.5 * ell + 4.0 * math.sqrt(var_q + width**2) + 5.0 * width
    if n is None:
        n = max(128, int(math.ceil(2.0 * half / (width / 10.0))))
    return np.linspace(-half, half, n)


def qsd_step(state: TrajectoryState, dt: float, scales: DerivedScales,
             rng: np.random.Generator) -> TrajectoryState:
    """Advance one step; renormalized, time advanced by dt."""
    _check_dt(scales, state.x, dt)
    normals = rng.standard_normal((1, 2))
    a = math.sqrt(scales.a_sq)
    snapshots, _, leaked = _accel.qsd_run_core(
        state.psi.astype(complex), state.x, dt, 1, a, scales.m, scales.hbar,
        normals, np.array([1], dtype=np.int64))
    if leaked:
        raise PreconditionError("wavefunction density reached the grid boundary")
    return TrajectoryState(snapshots[0], state.x, state.t + dt, state.rng_seed)


@dataclass
class TrajectoryRun:
    """Recorded summaries of one trajectory: rows (t, <x>, <p>, dx, dp)."""

    times: np.ndarray
    records: np.ndarray  # (n_rec, 4): x, p, dx, dp
    psi_final: np.ndarray
    x: np.ndarray
    seed: int


def run_trajectory(psi0, x: np.ndarray, t_final: float, dt: float,
                   scales: DerivedScales, seed: int,
                   n_records: int = 50) -> TrajectoryRun:
    """Integrate to t_final; deterministic given the seed."""
    _check_dt(scales, x, dt)
    if not t_final > 0:
        raise DomainError(f"needs t_final > 0, got {t_final}")
    n_steps = int(round(t_final / dt))
    if n_steps < 1:
        raise DomainError("t_final shorter than one step")
    psi = _state_on_grid(psi0, x)
    rng = np.random.default_rng(seed)
    normals = rng.standard_normal((n_steps, 2))
    record_steps = np.unique(np.linspace(1, n_steps, min(n_records, n_steps)).astype(np.int64))
    a = math.sqrt(scales.a_sq)
    snapshots, _, leaked = _accel.qsd_run_core(
        psi, np.asarray(x, float), dt, n_steps, a, scales.m, scales.hbar,
        normals, record_steps)
    if leaked:
        raise PreconditionError("wavefunction density reached the grid boundary; "
                                "enlarge the box (see suggested_grid)")
    records = np.empty((len(record_steps), 4))
    for i, snap in enumerate(snapshots):
        o = observables(snap, x, scales.hbar)
        records[i] = (o["x"], o["p"], o["dx"], o["dp"])
    return TrajectoryRun(times=record_steps * dt, records=records,
                         psi_final=snapshots[-1], x=np.asarray(x, float), seed=seed)


@dataclass
class EnsembleSummary:
    """Cross-trajectory statistics at the final time plus the mean density
    matrix (1/N) sum |psi><psi|."""

    mean_density: DensityGrid
    x_means: np.ndarray
    p_means: np.ndarray
    dxs: np.ndarray
    dps: np.ndarray
    seeds: np.ndarray

    @property
    def n(self) -> int:
        return len(self.seeds)

    def uncertainty_products(self) -> np.ndarray:
        return self.dxs * self.dps


def ensemble_mean(runs: list[TrajectoryRun]) -> EnsembleSummary:
    """Reduce seeded runs to the summary; order-insensitive up to float
    reordering (~1e-12)."""
    if len(runs) < 1:
        raise DomainError("ensemble needs at least one trajectory")
    x = runs[0].x
    for r in runs[1:]:
        if r.x.shape != x.shape or not np.array_equal(r.x, x):
            raise DomainError("ensemble trajectories use mismatched grids")
    acc = np.zeros((len(x), len(x)), dtype=complex)
    for r in runs:
        acc += np.outer(r.psi_final, np.conj(r.psi_final))
    rho = DensityGrid(acc / len(runs), x).normalized()
    return EnsembleSummary(
        mean_density=rho,
        x_means=np.array([r.records[-1, 0] for r in runs]),
        p_means=np.array([r.records[-1, 1] for r in runs]),
        dxs=np.array([r.records[-1, 2] for r in runs]),
        dps=np.array([r.records[-1, 3] for r in runs]),
        seeds=np.array([r.seed for r in runs]),
    )


def run_ensemble(psi0, x: np.ndarray, t_final: float, dt: float,
                 scales: DerivedScales, base_seed: int, n_traj: int,
                 n_records: int = 25) -> tuple[list[TrajectoryRun], EnsembleSummary]:
    """N independent trajectories with seeds base_seed + index."""
    if n_traj < 1:
        raise DomainError("needs at least one trajectory")
    runs = [run_trajectory(psi0, x, t_final, dt, scales, base_seed + i, n_records)
            for i in range(n_traj)]
    return runs, ensemble_mean(runs)


def trajectories_to_csv(runs: list[TrajectoryRun], path) -> None:
    rows = []
    for r in runs:
        for t, rec in zip(r.times, r.records):
            rows.append([t, rec[0], rec[1], rec[2], rec[3], r.seed])
    np.savetxt(path, np.array(rows), delimiter=",",
               header="t,mean_x,mean_p,dx,dp,seed", comments="")
