"""Grid evolution, Wigner/Husimi transforms, positivity scans and the
phase-space weight distribution."""

import math
import warnings

import numpy as np
import pytest

from qbmlab import (
    DensityGrid,
    DomainError,
    ModelParams,
    PhaseGrid,
    RotatedCoords,
    cat_state,
    density_from_state,
    derive_scales,
    evolve_density,
    evolve_wigner,
    f_distribution,
    husimi_from_wigner,
    positivity_scan,
    propagate_density_form,
    wigner_transform,
)
from qbmlab.gaussians import CoherentStateParams, GaussianState, coherent_state
from qbmlab.kernels import wigner_of_density_form
from qbmlab.phasespace import (
    density_grid_from_form,
    density_grid_from_state,
    phase_box,
    spread_after,
    wigner_of_state,
)


def _coherent(scales, p=0.0, q=0.0):
    return GaussianState((coherent_state(CoherentStateParams(p=p, q=q), scales),))


def test_rotated_coords_roundtrip():
    r = RotatedCoords.from_xy(1.3, -0.4)
    assert r.X == pytest.approx(0.45)
    assert r.xi == pytest.approx(1.7)
    assert r.to_xy() == pytest.approx((1.3, -0.4))


# -- density evolution -------------------------------------------------------

def test_grid_vs_exact_evolution(unit_scales):
    cat = cat_state(4.0, unit_scales)
    x = np.linspace(-16, 16, 257)
    rho0 = density_grid_from_state(cat, x)
    t = 1.0  # alpha t = 1
    grid = evolve_density(rho0, t, unit_scales)
    exact = evolve_density(cat, t, unit_scales, x=x)
    d = 0.5 * ((grid.values - exact.values) + (grid.values - exact.values).conj().T)
    td = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(d))) * grid.h
    assert td <= 1e-3


def test_closed_system_purity_preserved():
    """a^2 -> 0: evolution is unitary and purity stays 1."""
    from qbmlab.gaussians import GaussianComponent

    params = ModelParams(m=1.0, gamma=1e-12, kT=1.0, hbar=1.0)
    scales = derive_scales(params)
    state = GaussianState((GaussianComponent(A=(1 / math.pi) ** 0.25, q0=0.0,
                                             L=1.0 + 0j, p0=0.3),))
    x = np.linspace(-20, 20, 257)
    rho_t = evolve_density(state, 2.0, scales, x=x)
    assert rho_t.purity() == pytest.approx(1.0, abs=1e-6)


def test_off_diagonal_decay_diagonal_persists(unit_scales):
    cat = cat_state(4.0, unit_scales)
    form = density_from_state(cat)
    vals0 = np.abs(complex(form(2.0, -2.0))) / complex(form(2.0, 2.0)).real
    ft = propagate_density_form(form, 0.5, unit_scales)
    vals1 = np.abs(complex(ft(2.0, -2.0))) / complex(ft(2.0, 2.0)).real
    assert vals1 < 0.05 * vals0


def test_boundary_mass_warning(unit_scales):
    x = np.linspace(-3, 3, 65)  # far too small for the cat
    rho0 = density_grid_from_state(cat_state(4.0, unit_scales), x)
    with pytest.warns(UserWarning, match="boundary mass"):
        evolve_density(rho0, 0.5, unit_scales)


def test_evolve_density_rejects_bad_time(unit_scales):
    x = np.linspace(-10, 10, 65)
    rho0 = density_grid_from_state(_coherent(unit_scales), x)
    with pytest.raises(DomainError):
        evolve_density(rho0, 0.0, unit_scales)


# -- Wigner transform --------------------------------------------------------

def test_wigner_marginals(unit_scales):
    cat = cat_state(4.0, unit_scales, p=0.5)
    x = np.linspace(-12, 12, 301)
    rho = density_grid_from_state(cat, x)
    w = wigner_transform(rho)
    wn = w.values / w.integral()
    # position marginal: integral over p
    wp = np.trapezoid(wn, w.p, axis=0)
    diag = np.diag(rho.values).real
    diag = diag / np.trapezoid(diag, x)
    assert np.max(np.abs(wp - diag)) <= 1e-6 * np.max(diag)
    # momentum marginal vs the analytic Wigner function's q-integral
    wq = np.trapezoid(wn, w.q, axis=1)
    ref = wigner_of_state(cat, w.p, w.q)
    refn = ref.values / ref.integral()
    wq_ref = np.trapezoid(refn, w.q, axis=1)
    assert np.max(np.abs(wq - wq_ref)) <= 1e-6 * np.max(np.abs(wq_ref))


def test_wigner_grid_vs_analytic(unit_scales):
    cat = cat_state(4.0, unit_scales)
    x = np.linspace(-12, 12, 301)
    rho = density_grid_from_state(cat, x)
    w = wigner_transform(rho)
    ref = wigner_of_state(cat, w.p, w.q)
    a = w.values / w.integral()
    b = ref.values / ref.integral()
    assert np.max(np.abs(a - b)) <= 1e-5 * np.max(np.abs(b))


def test_wigner_coherent_state_positive_and_peaked(unit_scales):
    p0, q0 = 0.8, -0.6
    p = np.linspace(p0 - 4, p0 + 4, 81)
    q = np.linspace(q0 - 4, q0 + 4, 81)
    w = wigner_of_state(_coherent(unit_scales, p=p0, q=q0), p, q)
    assert w.values.min() >= -1e-12 * w.values.max()
    ip, iq = np.unravel_index(np.argmax(w.values), w.values.shape)
    assert p[ip] == pytest.approx(p0, abs=0.11)
    assert q[iq] == pytest.approx(q0, abs=0.11)


def test_wigner_cat_interference_negative(unit_scales):
    cat = cat_state(4.0, unit_scales)
    p = np.linspace(-4, 4, 121)
    q = np.linspace(-4, 4, 121)
    w = wigner_of_state(cat, p, q)
    # fringes live at the midpoint q = 0
    mid = w.values[:, 60]
    assert w.values.min() < 0
    assert mid.min() < -0.1 * w.values.max()


def test_wigner_rejects_non_hermitian(unit_scales):
    x = np.linspace(-5, 5, 33)
    vals = np.random.default_rng(0).standard_normal((33, 33)) * (1 + 0j)
    vals[3, 7] += 1.0  # deliberately asymmetric
    with pytest.raises(DomainError, match="Hermitian"):
        wigner_transform(DensityGrid(vals, x))


# -- Husimi ------------------------------------------------------------------

def test_husimi_nonnegative_on_fringed_cat(unit_scales):
    cat = cat_state(4.0, unit_scales)
    p = np.linspace(-5, 5, 161)
    q = np.linspace(-5, 5, 161)
    w = wigner_of_state(cat, p, q)
    sigma_q = math.sqrt(unit_scales.hbar / (2.0 * unit_scales.m * unit_scales.alpha))
    h = husimi_from_wigner(w, sigma_q)
    assert h.values.min() >= -1e-9


def test_husimi_gaussian_widths_add_in_quadrature(unit_scales):
    state = _coherent(unit_scales)
    p = np.linspace(-6, 6, 201)
    q = np.linspace(-6, 6, 201)
    w = wigner_of_state(state, p, q)
    sigma_q = 0.9
    h = husimi_from_wigner(w, sigma_q)
    m0 = PhaseGrid(w.values, p, q).normalized().moments()
    m1 = h.moments()
    # q-smearing adds sigma_q^2 in q and (hbar/2sigma_q)^2 in p
    assert m1["var_q"] == pytest.approx(m0["var_q"] + sigma_q**2, rel=1e-4)
    assert m1["var_p"] == pytest.approx(m0["var_p"] + (0.5 / sigma_q) ** 2, rel=1e-4)


def test_husimi_rejects_bad_width(unit_scales):
    w = wigner_of_state(_coherent(unit_scales), np.linspace(-3, 3, 31),
                        np.linspace(-3, 3, 31))
    with pytest.raises(DomainError):
        husimi_from_wigner(w, 0.0)


def test_husimi_small_width_limit(unit_scales):
    """sigma_q -> grid spacing: q-smearing becomes a near-identity and the
    output approaches a p-smeared-only transform."""
    state = _coherent(unit_scales)
    p = np.linspace(-8, 8, 161)
    q = np.linspace(-8, 8, 161)
    w = wigner_of_state(state, p, q)
    sigma_q = float(q[1] - q[0])
    h = husimi_from_wigner(w, sigma_q)
    m0 = PhaseGrid(w.values, p, q).normalized().moments()
    m1 = h.moments()
    assert m1["var_q"] == pytest.approx(m0["var_q"], rel=0.05)
    assert m1["var_p"] > 2.0 * m0["var_p"]


# -- Wigner evolution --------------------------------------------------------

def test_evolve_wigner_moment_gains(unit_scales):
    """Narrow initial W: Var_p gains 2Dt (the p-marginal of the kernel) and
    Var_q gains 2Dt^3/3m^2 on top of free streaming."""
    state = _coherent(unit_scales)
    p = np.linspace(-4.5, 4.5, 161)
    q = np.linspace(-4.5, 4.5, 161)
    w0 = wigner_of_state(state, p, q)
    t = 0.8
    var_p0 = PhaseGrid(w0.values, p, q).normalized().moments()["var_p"]
    p_out = np.linspace(-10, 10, 161)
    q_out = np.linspace(-10, 10, 161)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        wt = evolve_wigner(w0, t, unit_scales, p_out=p_out, q_out=q_out)
    m = wt.moments()
    gain = m["var_p"] - var_p0
    assert gain == pytest.approx(2.0 * unit_scales.D * t, rel=1e-3)


def test_route_equivalence_density_vs_wigner(unit_scales):
    """Wigner of the evolved density equals the Wigner-propagated Wigner."""
    rng = np.random.default_rng(7)
    for _ in range(2):
        ell = rng.uniform(2.0, 4.0)
        cat = cat_state(ell, unit_scales, p=rng.uniform(-0.5, 0.5))
        form = density_from_state(cat)
        for at in (0.5, 2.0):
            t = at / unit_scales.alpha
            pg, qg = phase_box(cat, t, unit_scales, n_p=141, n_q=141)
            w0 = wigner_of_state(cat, *phase_box(cat, 1e-9, unit_scales,
                                                 n_p=241, n_q=241))
            via_w = evolve_wigner(w0, t, unit_scales, p_out=pg, q_out=qg)
            ft = propagate_density_form(form, t, unit_scales)
            direct = PhaseGrid(wigner_of_density_form(ft, pg, qg), pg, qg).normalized()
            dp = pg[1] - pg[0]
            dq = qg[1] - qg[0]
            l1 = 0.5 * np.sum(np.abs(via_w.values - direct.values)) * dp * dq
            assert l1 <= 1e-3


def test_evolve_wigner_identity_limit(unit_scales):
    """As t -> 0+ the output approaches the input: the genuine
    momentum-diffusion change is O(Dt).  The kernel position width shrinks
    like t^{3/2}, so a fixed grid only resolves the quadrature down to some
    smallest t; the check stays inside that resolved range."""
    state = _coherent(unit_scales)
    p = np.linspace(-4, 4, 241)
    q = np.linspace(-4, 4, 241)
    w0 = wigner_of_state(state, p, q)
    po, qo = p[::4], q[::4]
    ref = wigner_of_state(state, po, qo)
    a = ref.values / ref.integral()
    errs = []
    for t in (0.6, 0.3, 0.15):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            wt = evolve_wigner(w0, t, unit_scales, p_out=po, q_out=qo)
        errs.append(float(np.max(np.abs(wt.values - a)) / a.max()))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] <= 0.4
    assert errs[0] / errs[2] >= 1.5


def test_spread_after_formulas(unit_scales):
    var_p, var_q = spread_after(2.0, unit_scales, 0.5, 0.5)
    assert var_p == pytest.approx(0.5 + 2.0 * unit_scales.D * 2.0)
    assert var_q == pytest.approx(0.5 + 4.0 * 0.5 + 2.0 * unit_scales.D * 8.0 / 3.0)


# -- positivity --------------------------------------------------------------

def test_positivity_scan_coherent_always_positive(unit_scales):
    state = _coherent(unit_scales)
    p = np.linspace(-6, 6, 101)
    q = np.linspace(-6, 6, 101)
    w0 = wigner_of_state(state, p, q)
    p_out = np.linspace(-12, 12, 101)
    q_out = np.linspace(-12, 12, 101)
    results, t_first = positivity_scan(w0, [0.3, 0.6, 1.0], unit_scales,
                                       p_out=p_out, q_out=q_out)
    assert t_first == 0.3
    for _, mn in results:
        assert mn >= -1e-6


def test_positivity_crossing_time_window(std_scales):
    """l=4 cat at unit-style params: t* within [0.5, 1.5] t_loc (measured via
    the exact evolved Wigner function)."""
    cat = cat_state(4.0, std_scales)
    form = density_from_state(cat)
    t_loc = std_scales.t_loc
    t_star = None
    for t in np.linspace(0.2 * t_loc, 1.6 * t_loc, 15):
        pg, qg = phase_box(cat, float(t), std_scales, n_p=96, n_q=96)
        vals = wigner_of_density_form(propagate_density_form(form, float(t), std_scales),
                                      pg, qg)
        if vals.min() >= -1e-6 * vals.max():
            t_star = float(t)
            break
    assert t_star is not None
    assert 0.5 * t_loc <= t_star <= 1.5 * t_loc


def test_positivity_crossing_nonincreasing_in_kT():
    t_stars = []
    for kT in (1.0, 2.0, 4.0):
        scales = derive_scales(ModelParams(m=1.0, gamma=1.0, kT=kT, hbar=1.0))
        cat = cat_state(4.0, scales)
        form = density_from_state(cat)
        t_star = None
        for t in np.linspace(0.05, 2.0, 40):
            pg, qg = phase_box(cat, float(t), scales, n_p=81, n_q=81)
            vals = wigner_of_density_form(
                propagate_density_form(form, float(t), scales), pg, qg)
            if vals.min() >= -1e-6 * vals.max():
                t_star = float(t)
                break
        t_stars.append(t_star)
    assert all(t is not None for t in t_stars)
    assert t_stars[0] >= t_stars[1] >= t_stars[2]


def test_positivity_scan_rejects_empty(unit_scales):
    w = wigner_of_state(_coherent(unit_scales), np.linspace(-3, 3, 21),
                        np.linspace(-3, 3, 21))
    with pytest.raises(DomainError):
        positivity_scan(w, [], unit_scales)


# -- weight distribution -----------------------------------------------------

def test_f_distribution_normalized_with_crosscheck(unit_scales):
    cat = cat_state(4.0, unit_scales)
    t = 5.0
    pg, qg = phase_box(cat, t, unit_scales, n_p=81, n_q=81)
    f = f_distribution(cat, pg, qg, t, unit_scales)
    assert f.integral() == pytest.approx(1.0, abs=1e-9)
    # the formal-inversion route agrees with the kernel fold
    assert f.metadata["inversion_deviation"] <= 1e-8


def test_f_distribution_monotone_convergence_to_wigner(unit_scales):
    """sup-norm deviation from the Wigner function decreases along the
    alpha-t ladder (the exact rate is ~0.4/alpha t; see the acceptance
    suite for the absolute band)."""
    cat = cat_state(4.0, unit_scales)
    form = density_from_state(cat)
    devs = []
    for at in (2.0, 3.0, 5.0, 10.0):
        t = at / unit_scales.alpha
        pg, qg = phase_box(cat, t, unit_scales, n_p=81, n_q=81)
        f = f_distribution(cat, pg, qg, t, unit_scales)
        wt = PhaseGrid(wigner_of_density_form(
            propagate_density_form(form, t, unit_scales), pg, qg), pg, qg).normalized()
        devs.append(float(np.max(np.abs(f.values - wt.values))
                          / np.max(np.abs(wt.values))))
    assert all(b < a * 1.1 for a, b in zip(devs, devs[1:]))
    assert devs[-1] < devs[0]


def test_f_distribution_grid_route_matches_gaussian_route(unit_scales):
    state = _coherent(unit_scales)
    t = 5.0
    pg, qg = phase_box(state, t, unit_scales, n_p=61, n_q=61)
    f_exact = f_distribution(state, pg, qg, t, unit_scales)
    x = np.linspace(-14, 14, 301)
    rho0 = density_grid_from_state(state, x)
    f_grid = f_distribution(rho0, pg, qg, t, unit_scales)
    assert np.max(np.abs(f_exact.values - f_grid.values)) <= \
        1e-5 * np.max(np.abs(f_exact.values))


def test_f_distribution_convergence_precondition(unit_scales):
    state = _coherent(unit_scales)
    with pytest.raises(DomainError, match="convergence"):
        f_distribution(state, np.linspace(-3, 3, 11), np.linspace(-3, 3, 11),
                       0.3, unit_scales)


# -- serialization -----------------------------------------------------------

def test_density_grid_csv_roundtrip(tmp_path, unit_scales):
    x = np.linspace(-5, 5, 41)
    rho = density_grid_from_state(cat_state(3.0, unit_scales), x)
    path = tmp_path / "rho.csv"
    rho.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    back = (data[:, 2] + 1j * data[:, 3]).reshape(41, 41)
    assert np.allclose(back, rho.values, atol=1e-12)
    import json
    meta = json.loads((tmp_path / "rho.csv.json").read_text())
    assert meta["n"] == 41


def test_phase_grid_csv_roundtrip(tmp_path, unit_scales):
    p = np.linspace(-3, 3, 21)
    q = np.linspace(-4, 4, 31)
    w = wigner_of_state(_coherent(unit_scales), p, q)
    path = tmp_path / "w.csv"
    w.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.allclose(data[:, 2].reshape(21, 31), w.values, atol=1e-15)
