"""Diagonal representation: projector assembly, trace distance, and the
convergence of the reconstruction along a time ladder."""

import math

import numpy as np
import pytest

from qbmlab import (
    CoherentStateParams,
    DomainError,
    GaussianComponent,
    GaussianState,
    cat_state,
    coherent_state,
    density_from_state,
)
from qbmlab.phasespace import PhaseGrid, density_grid_from_form
from qbmlab.reconstruction import (
    assemble,
    coherent_widths,
    convergence_ladder,
    reconstruct_at,
    reconstruction_error,
    smallest_eigenvalue,
)


def _phase_grid(scales, p_half, q_half):
    """Grid at one third of the projector widths, centered at the origin."""
    wq, wp = coherent_widths(scales)
    p = np.linspace(-p_half, p_half, 2 * int(math.ceil(p_half / (wp / 3.0))) + 1)
    q = np.linspace(-q_half, q_half, 2 * int(math.ceil(q_half / (wq / 3.0))) + 1)
    return p, q


def _delta_grid(p, q, p0, q0):
    vals = np.zeros((len(p), len(q)))
    vals[np.argmin(np.abs(p - p0)), np.argmin(np.abs(q - q0))] = 1.0
    return PhaseGrid(vals, p, q).normalized()


def _projector_grid(scales, p0, q0, x):
    Lam = (scales.m * scales.alpha / scales.hbar) * (1.0 - 1.0j)
    comp = GaussianComponent(A=1.0, q0=q0, L=Lam, p0=p0)
    form = density_from_state(GaussianState((comp,)))
    return density_grid_from_form(form, x)


def test_coherent_widths_unit_values(unit_scales):
    wq, wp = coherent_widths(unit_scales)
    assert wq == pytest.approx(math.sqrt(0.5))
    assert wp == pytest.approx(1.0)
    # the projector itself saturates Delta p Delta q = hbar / sqrt(2)
    c = coherent_state(CoherentStateParams(p=0.0, q=0.0), unit_scales)
    assert c.L == pytest.approx((unit_scales.m * unit_scales.alpha / unit_scales.hbar)
                                * (1.0 - 1.0j))


# -- assembly ------------------------------------------------------------------

def test_delta_peak_assembles_to_projector(unit_scales):
    p, q = _phase_grid(unit_scales, 4.0, 4.0)
    x = np.linspace(-8, 8, 321)
    for p0, q0 in ((0.0, 0.0), (1.0, -0.5)):
        # place the peak exactly on the phase grid
        p0 = p[np.argmin(np.abs(p - p0))]
        q0 = q[np.argmin(np.abs(q - q0))]
        rho = assemble(_delta_grid(p, q, p0, q0), unit_scales, x)
        ref = _projector_grid(unit_scales, p0, q0, x)
        assert reconstruction_error(ref, rho) <= 0.02


def test_two_peak_mixture_has_no_interference_ridge(unit_scales):
    p, q = _phase_grid(unit_scales, 4.0, 6.0)
    x = np.linspace(-10, 10, 401)
    ell = 6.0
    vals = (_delta_grid(p, q, 0.0, -ell / 2).values
            + _delta_grid(p, q, 0.0, +ell / 2).values)
    rho = assemble(PhaseGrid(vals, p, q).normalized(), unit_scales, x)
    i_plus = np.argmin(np.abs(x - ell / 2))
    i_minus = np.argmin(np.abs(x + ell / 2))
    diag = abs(rho.values[i_plus, i_plus])
    ridge = abs(rho.values[i_plus, i_minus])
    assert ridge < 1e-6 * diag


def test_assembly_linearity(unit_scales):
    rng = np.random.default_rng(8)
    p, q = _phase_grid(unit_scales, 3.0, 3.0)
    x = np.linspace(-6, 6, 201)
    f1 = PhaseGrid(rng.random((len(p), len(q))), p, q).normalized()
    f2 = PhaseGrid(rng.random((len(p), len(q))), p, q).normalized()
    lam = 0.3
    mix = PhaseGrid(lam * f1.values + (1 - lam) * f2.values, p, q)
    lhs = assemble(mix, unit_scales, x, normalize=False).values
    rhs = (lam * assemble(f1, unit_scales, x, normalize=False).values
           + (1 - lam) * assemble(f2, unit_scales, x, normalize=False).values)
    scale = np.max(np.abs(rhs))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


def test_positivity_transport(unit_scales):
    rng = np.random.default_rng(9)
    p, q = _phase_grid(unit_scales, 3.0, 3.0)
    x = np.linspace(-6, 6, 161)
    for _ in range(3):
        f = PhaseGrid(rng.random((len(p), len(q))), p, q).normalized()
        rho = assemble(f, unit_scales, x)
        assert smallest_eigenvalue(rho) >= -1e-8


def test_coarse_phase_grid_warns_with_aliasing_estimate(unit_scales):
    wq, wp = coherent_widths(unit_scales)
    p = np.linspace(-3, 3, 4)   # spacing 2 > wp
    q = np.linspace(-3, 3, 4)   # spacing 2 > wq
    f = PhaseGrid(np.ones((4, 4)), p, q).normalized()
    x = np.linspace(-5, 5, 101)
    with pytest.warns(UserWarning, match="aliasing"):
        assemble(f, unit_scales, x)


# -- trace distance ------------------------------------------------------------

def test_error_identical_is_zero(unit_scales):
    x = np.linspace(-6, 6, 161)
    rho = _projector_grid(unit_scales, 0.3, -0.2, x)
    assert reconstruction_error(rho, rho) == pytest.approx(0.0, abs=1e-14)


def test_error_orthogonal_projectors_is_one(unit_scales):
    x = np.linspace(-14, 14, 401)
    a = _projector_grid(unit_scales, 0.0, -5.0, x)
    b = _projector_grid(unit_scales, 0.0, +5.0, x)
    assert reconstruction_error(a, b) == pytest.approx(1.0, abs=1e-6)


def test_error_rejects_mismatched_grids(unit_scales):
    xa = np.linspace(-6, 6, 161)
    xb = np.linspace(-6, 6, 160)
    with pytest.raises(DomainError, match="grid"):
        reconstruction_error(_projector_grid(unit_scales, 0, 0, xa),
                             _projector_grid(unit_scales, 0, 0, xb))


def test_error_cat_vs_decohered_equals_coherence_weight(unit_scales):
    """Dropping the cross terms of a well-separated even cat moves the state
    by exactly the coherence weight: trace distance 1/2 (each branch holds
    weight 1/2 and the cross term has unit relative magnitude at t = 0)."""
    ell = 8.0
    cat = cat_state(ell, unit_scales).normalized()
    x = np.linspace(-10, 10, 401)
    rho = density_grid_from_form(density_from_state(cat), x)
    branches = [GaussianState((c,)) for c in cat.components]
    assert len(branches) == 2
    dec = 0.5 * sum(density_grid_from_form(density_from_state(b.normalized()), x).values
                    for b in branches)
    from qbmlab.phasespace import DensityGrid

    rho_dec = DensityGrid(dec, x)
    d = reconstruction_error(rho, rho_dec)
    assert d == pytest.approx(0.5, abs=1e-3)


# -- end-to-end reconstruction ---------------------------------------------------

def test_coherent_state_reconstructs_early(unit_scales):
    """With the exact weight a coherent state reconstructs to well under 2%
    already at alpha t = 2; the Wigner weight carries the projector-smearing
    floor (~0.1/alpha t) and only shrinks with time."""
    state = GaussianState((coherent_state(CoherentStateParams(p=0.0, q=0.0),
                                          unit_scales),))
    rep = reconstruct_at(state, 2.0 / unit_scales.alpha, unit_scales, weight="f")
    assert rep.reconstruction_error <= 0.02
    assert rep.alpha_t == pytest.approx(2.0)
    r = rep.report()
    assert set(r) == {"alpha_t", "trace_distance", "min_eigenvalue", "f_min"}
    assert r["min_eigenvalue"] >= -1e-8
    w2 = reconstruct_at(state, 2.0, unit_scales).reconstruction_error
    w5 = reconstruct_at(state, 5.0, unit_scales).reconstruction_error
    assert rep.reconstruction_error < w5 < w2 < 0.06


def test_cat_ladder_monotone(unit_scales):
    cat = cat_state(4.0, unit_scales)
    reps = convergence_ladder(cat, [2.0, 3.0, 5.0], unit_scales)
    errs = [r.reconstruction_error for r in reps]
    # non-increasing with a 10% noise allowance
    assert all(b <= 1.1 * a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 0.05


def test_ladder_validates_time_list(unit_scales):
    cat = cat_state(4.0, unit_scales)
    with pytest.raises(DomainError):
        convergence_ladder(cat, [], unit_scales)
    with pytest.raises(DomainError):
        convergence_ladder(cat, [3.0, 2.0], unit_scales)


def test_reconstruct_rejects_unknown_weight(unit_scales):
    cat = cat_state(4.0, unit_scales)
    with pytest.raises(DomainError, match="weight"):
        reconstruct_at(cat, 3.0, unit_scales, weight="husimi")


def test_f_weight_below_convergence_bound_raises(unit_scales):
    cat = cat_state(4.0, unit_scales)
    with pytest.raises(DomainError, match="convergence"):
        reconstruct_at(cat, 0.2, unit_scales, weight="f")
