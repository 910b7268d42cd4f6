"""Experiment runner: parse a config file, execute a named experiment and
emit CSV/JSON artifacts plus a manifest with content hashes.

Exit codes: 0 success, 2 config error, 3 numerical precondition error.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .errors import DomainError, PreconditionError
from .gaussians import GaussianState, cat_state, density_from_state
from .kernels import propagate_density_form, wigner_of_density_form
from .model import ModelParams, DerivedScales, derive_scales, params_from_config
from .phasespace import PhaseGrid, density_grid_from_form
from . import diagnostics, qsd, reconstruction

EXPERIMENTS = ("decohere", "wigner-positivity", "f-vs-wigner",
               "qsd-ensemble", "reconstruct", "residuals")


@dataclass
class ExperimentConfig:
    params: ModelParams
    ell: float = 4.0
    p0: float = 0.0
    ladder: tuple = (2.0, 3.0, 5.0)
    t_final_alpha: float = 5.0
    dt: float | None = None
    n_trajectories: int = 16
    grid_n: int = 257
    raw: dict = field(default_factory=dict)


def load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read config {path!r}: {exc}") from exc
    params = params_from_config(text)
    cp = configparser.ConfigParser()
    cp.read_string(text)
    cfg = ExperimentConfig(params=params)
    if "state" in cp:
        sec = cp["state"]
        if "ell" in sec:
            cfg.ell = _positive_float(sec, "ell", "state")
        if "p" in sec:
            cfg.p0 = float(sec["p"])
    if "numerics" in cp:
        sec = cp["numerics"]
        if "alpha_t_ladder" in sec:
            try:
                cfg.ladder = tuple(float(v) for v in sec["alpha_t_ladder"].split(","))
            except ValueError as exc:
                raise DomainError(f"[numerics] alpha_t_ladder is not a comma list "
                                  f"of numbers: {sec['alpha_t_ladder']!r}") from exc
            if any(b <= a for a, b in zip(cfg.ladder, cfg.ladder[1:])) or cfg.ladder[0] <= 0:
                raise DomainError("[numerics] alpha_t_ladder must be positive and increasing")
        if "t_final_alpha" in sec:
            cfg.t_final_alpha = _positive_float(sec, "t_final_alpha", "numerics")
        if "dt" in sec:
            cfg.dt = _positive_float(sec, "dt", "numerics")
        if "n_trajectories" in sec:
            cfg.n_trajectories = int(_positive_float(sec, "n_trajectories", "numerics"))
        if "grid_n" in sec:
            cfg.grid_n = int(_positive_float(sec, "grid_n", "numerics"))
    cfg.raw = {s: dict(cp[s]) for s in cp.sections()}
    return cfg


def _positive_float(sec, key: str, name: str) -> float:
    try:
        v = float(sec[key])
    except ValueError as exc:
        raise DomainError(f"[{name}] key {key!r} is not a number: {sec[key]!r}") from exc
    if not (v > 0 and math.isfinite(v)):
        raise DomainError(f"[{name}] key {key!r} must be positive and finite, got {v}")
    return v


class ArtifactWriter:
    """Deterministic CSV/JSON output with content hashing for the manifest."""

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.files: dict[str, str] = {}

    def _register(self, name: str) -> None:
        digest = hashlib.sha256((self.outdir / name).read_bytes()).hexdigest()
        self.files[name] = digest

    def csv(self, name: str, header: str, rows) -> None:
        arr = np.atleast_2d(np.asarray(rows, dtype=float))
        np.savetxt(self.outdir / name, arr, delimiter=",", header=header,
                   comments="", fmt="%.17g")
        self._register(name)

    def json(self, name: str, payload: dict) -> None:
        (self.outdir / name).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
        self._register(name)


def _cat(cfg: ExperimentConfig, scales: DerivedScales) -> GaussianState:
    return cat_state(cfg.ell, scales, p=cfg.p0)


def run_decohere(cfg, scales, w: ArtifactWriter, seed: int) -> None:
    cat = _cat(cfg, scales)
    ts = diagnostics.decoherence_window(scales, cfg.ell)
    fit = diagnostics.decoherence_rate(cat, ts, scales, cfg.ell)
    w.csv("coherence.csv", "t,log_coherence_ratio",
          np.column_stack([ts, fit.log_values]))
    w.json("decohere.json", {"rate": fit.rate, "ell": fit.ell,
                             "constant": fit.constant,
                             "window": list(fit.window)})


def run_wigner_positivity(cfg, scales, w: ArtifactWriter, seed: int) -> None:
    cat = _cat(cfg, scales)
    form = density_from_state(cat)
    t_loc = scales.t_loc
    t_list = np.linspace(0.1 * t_loc, 2.0 * t_loc, 39)
    mins = []
    t_star = None
    for t in t_list:
        ft = propagate_density_form(form, float(t), scales)
        from .phasespace import phase_box
        pg, qg = phase_box(cat, float(t), scales, n_p=96, n_q=96)
        vals = wigner_of_density_form(ft, pg, qg)
        mn = float(vals.min())
        mins.append(mn)
        if t_star is None and mn >= -1e-6 * vals.max():
            t_star = float(t)
    w.csv("positivity.csv", "t,min_w", np.column_stack([t_list, mins]))
    gamma_kT = scales.hbar * scales.alpha**2
    unit = math.sqrt(scales.hbar / gamma_kT)
    w.json("positivity.json", {
        "t_star": t_star,
        "t_loc": t_loc,
        "t_star_over_t_loc": (t_star / t_loc) if t_star else None,
        "analytic_candidates": {
            "sqrt(sqrt(3)/2)*t_loc": math.sqrt(math.sqrt(3.0) / 2.0) * unit,
            "sqrt(sqrt(3)/4)*t_loc": math.sqrt(math.sqrt(3.0) / 4.0) * unit,
        },
    })


def run_f_vs_wigner(cfg, scales, w: ArtifactWriter, seed: int) -> None:
    from .phasespace import f_distribution, phase_box

    cat = _cat(cfg, scales)
    form = density_from_state(cat)
    rows = []
    for at in cfg.ladder:
        t = at / scales.alpha
        pg, qg = phase_box(cat, t, scales, n_p=96, n_q=96)
        f = f_distribution(cat, pg, qg, t, scales)
        ft = propagate_density_form(form, t, scales)
        wt = PhaseGrid(wigner_of_density_form(ft, pg, qg), pg, qg).normalized()
        dev = float(np.max(np.abs(f.values - wt.values)) / np.max(np.abs(wt.values)))
        rows.append([at, dev])
    w.csv("f_vs_wigner.csv", "alpha_t,sup_rel_deviation", rows)
    w.json("f_vs_wigner.json", {"ladder": [r[0] for r in rows],
                                "deviation": [r[1] for r in rows]})


def run_qsd_ensemble(cfg, scales, w: ArtifactWriter, seed: int) -> None:
    t_final = cfg.t_final_alpha / scales.alpha
    x = qsd.suggested_grid(scales, cfg.ell, t_final)
    dt = cfg.dt if cfg.dt is not None else 0.9 * qsd.dt_bound(scales, x, 0.0)
    dt = min(dt, 0.9 * qsd.dt_bound(scales, x, dt))
    cat = _cat(cfg, scales)
    runs, summary = qsd.run_ensemble(cat, x, t_final, dt, scales,
                                     base_seed=seed, n_traj=cfg.n_trajectories)
    qsd.trajectories_to_csv(runs, w.outdir / "trajectories.csv")
    w._register("trajectories.csv")
    form_t = propagate_density_form(density_from_state(cat), t_final, scales)
    rho_exact = density_grid_from_form(form_t, x)
    td = reconstruction.reconstruction_error(summary.mean_density, rho_exact)
    prods = summary.uncertainty_products()
    w.json("qsd_ensemble.json", {
        "n_trajectories": summary.n, "t_final": t_final, "dt": dt,
        "median_dx_dp": float(np.median(prods)),
        "target_dx_dp": scales.hbar / math.sqrt(2.0),
        "trace_distance_to_exact": td,
        "base_seed": seed,
    })


def run_reconstruct(cfg, scales, w: ArtifactWriter, seed: int) -> None:
    cat = _cat(cfg, scales)
    t_list = [at / scales.alpha for at in cfg.ladder]
    reps = reconstruction.convergence_ladder(cat, t_list, scales)
    w.csv("reconstruct.csv", "alpha_t,trace_distance,min_eigenvalue,f_min",
          [[r.alpha_t, r.reconstruction_error, r.min_eigenvalue,
            float(r.f.values.min())] for r in reps])
    w.json("reconstruct.json", {"reports": [r.report() for r in reps]})


def run_residuals(cfg, scales, w: ArtifactWriter, seed: int) -> None:
    from .phasespace import density_grid_from_form, phase_box
    from .phasespace import f_distribution

    cat = _cat(cfg, scales)
    form = density_from_state(cat)
    reports = []
    # density-evolution residual at t_loc
    t = scales.t_loc
    h_t = 1e-3 * scales.t_loc
    half = 4.0 * cfg.ell
    x = np.linspace(-half, half, cfg.grid_n)
    rhos = [density_grid_from_form(propagate_density_form(form, t + dtau, scales), x)
            for dtau in (-h_t, 0.0, h_t)]
    reports.append(diagnostics.master_residual(rhos[0], rhos[1], rhos[2], h_t,
                                               scales, time=t))
    # weight-equation residuals at the top of the ladder
    at = cfg.ladder[-1]
    t = at / scales.alpha
    pg, qg = phase_box(cat, t, scales, n_p=161, n_q=241)
    h_t = 1e-3 * t
    fs = [f_distribution(cat, pg, qg, t + dtau, scales) for dtau in (-h_t, 0.0, h_t)]
    reports.append(diagnostics.fokker_planck_residual(fs[0], fs[1], fs[2],
                                                      "f-equation", scales, h_t, time=t))
    ws = [PhaseGrid(wigner_of_density_form(
        propagate_density_form(form, t + dtau, scales), pg, qg), pg, qg).normalized()
        for dtau in (-h_t, 0.0, h_t)]
    reports.append(diagnostics.fokker_planck_residual(ws[0], ws[1], ws[2],
                                                      "W-equation", scales, h_t, time=t))
    w.json("residuals.json", {"reports": [json.loads(r.to_json()) for r in reports]})


_RUNNERS = {
    "decohere": run_decohere,
    "wigner-positivity": run_wigner_positivity,
    "f-vs-wigner": run_f_vs_wigner,
    "qsd-ensemble": run_qsd_ensemble,
    "reconstruct": run_reconstruct,
    "residuals": run_residuals,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbmlab",
        description="High-temperature quantum Brownian motion experiments.")
    parser.add_argument("--config", required=True, help="sectioned key-value config file")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        scales = derive_scales(cfg.params)
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    writer = ArtifactWriter(Path(args.out))
    try:
        _RUNNERS[args.experiment](cfg, scales, writer, args.seed)
    except (DomainError, PreconditionError) as exc:
        print(f"numerical precondition error: {exc}", file=sys.stderr)
        return 3

    manifest = {
        "experiment": args.experiment,
        "seed": args.seed,
        "config": cfg.raw,
        "derived_scales": scales.as_dict(),
        "backend": _accel.BACKEND,
        "versions": {
            "package": __version__,
            "python": ".".join(map(str, sys.version_info[:3])),
            "numpy": np.__version__,
        },
        "files": writer.files,
    }
    (writer.outdir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    if not args.quiet:
        for name, digest in sorted(writer.files.items()):
            print(f"{name}  sha256:{digest[:16]}")
        print(f"manifest.json written to {writer.outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
