"""qbmlab: high-temperature quantum Brownian motion of a free particle.

Closed-form density-matrix propagation, Wigner/Husimi phase-space
transforms, the post-decoherence diagonal representation over localized
Gaussian states, a stochastic pure-state unravelling, and residual
diagnostics against the governing evolution equations.
"""

__version__ = "0.1.0"

from .errors import DomainError, PreconditionError
from .model import (
    DerivedScales,
    ModelParams,
    TimescaleReport,
    derive_scales,
    params_from_config,
    timescales,
)
from .gaussians import (
    CoherentStateParams,
    GaussianComponent,
    GaussianState,
    cat_state,
    coherent_state,
    density_from_state,
    moments,
    overlap,
)
from .kernels import (
    DrivingPath,
    JKernel,
    KernelCoeffs,
    WignerKernel,
    f_kernel,
    kbar_coeffs,
    propagate_density_form,
    wigner_kernel,
)
from .phasespace import (
    DensityGrid,
    PhaseGrid,
    RotatedCoords,
    evolve_density,
    evolve_wigner,
    f_distribution,
    husimi_from_wigner,
    positivity_scan,
    wigner_transform,
)
from .qsd import (
    EnsembleSummary,
    TrajectoryState,
    WienerIncrement,
    ensemble_mean,
    qsd_step,
    run_ensemble,
    run_trajectory,
)
from .reconstruction import (
    DiagonalRepresentation,
    assemble,
    convergence_ladder,
    reconstruction_error,
)
from .diagnostics import (
    ResidualReport,
    decoherence_rate,
    fokker_planck_residual,
    master_residual,
)

__all__ = [
    "DomainError", "PreconditionError",
    "ModelParams", "DerivedScales", "TimescaleReport",
    "derive_scales", "timescales", "params_from_config",
    "CoherentStateParams", "GaussianComponent", "GaussianState",
    "coherent_state", "cat_state", "density_from_state", "moments", "overlap",
    "JKernel", "DrivingPath", "KernelCoeffs", "WignerKernel",
    "kbar_coeffs", "propagate_density_form", "wigner_kernel", "f_kernel",
    "DensityGrid", "PhaseGrid", "RotatedCoords",
    "evolve_density", "evolve_wigner", "wigner_transform",
    "husimi_from_wigner", "positivity_scan", "f_distribution",
    "TrajectoryState", "WienerIncrement", "EnsembleSummary",
    "qsd_step", "run_trajectory", "run_ensemble", "ensemble_mean",
    "DiagonalRepresentation", "assemble", "reconstruction_error",
    "convergence_ladder",
    "ResidualReport", "master_residual", "fokker_planck_residual",
    "decoherence_rate",
]
