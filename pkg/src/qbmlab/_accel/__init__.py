"""Backend selection for the hot numeric kernels.

The numba backend is used when available; set QBMLAB_NO_NUMBA=1 to force the
pure-numpy fallback (same algorithms, vectorized instead of jitted).
`benchmarks/benchmark_backends.py` compares the two.
"""

import os

USE_NUMBA = os.environ.get("QBMLAB_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from ._numba import (
            evolve_density_grid,
            evolve_wigner_grid,
            wigner_from_density_grid,
            f_grid_from_density_grid,
            qsd_run_core,
        )
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dep, belt and braces
        USE_NUMBA = False

if not USE_NUMBA:
    from ._numpy import (
        evolve_density_grid,
        evolve_wigner_grid,
        wigner_from_density_grid,
        f_grid_from_density_grid,
        qsd_run_core,
    )
    BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "USE_NUMBA",
    "evolve_density_grid",
    "evolve_wigner_grid",
    "wigner_from_density_grid",
    "f_grid_from_density_grid",
    "qsd_run_core",
]
