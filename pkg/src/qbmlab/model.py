"""Physical parameters, derived constants and characteristic timescales.

Everything downstream works in the dimensionless internal convention
hbar = m = 1; user-facing parameters are converted once at the boundary
(see `ModelParams.nondimensionalize`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass


from .errors import DomainError

_FIELDS = ("m", "gamma", "kT", "hbar")


@dataclass(frozen=True)
class ModelParams:
    """Free-particle quantum Brownian motion in the high-temperature,
    negligible-dissipation limit: mass, dissipation rate, thermal energy
    and Planck's constant.  All strictly positive."""

    m: float
    gamma: float
    kT: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in _FIELDS:
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise DomainError(f"parameter {name!r} must be positive and finite, got {value}")

    def nondimensionalize(self) -> tuple["ModelParams", dict]:
        """Return an equivalent parameter set with hbar = m = 1 plus the
        unit-conversion record (length, time, mass scales) used to get there.

        With length unit L, time unit T, mass unit M chosen so that
        hbar -> 1 and m -> 1 and kT -> kT' = 1 is *not* imposed (gamma and
        kT keep one free scale between them)."""
        M = self.m
        # choose T = 1 (keep the user's time unit), fix L from hbar = M L^2 / T
        T = 1.0
        L = math.sqrt(self.hbar * T / M)
        E = M * L * L / (T * T)  # energy unit
        scaled = ModelParams(m=1.0, gamma=self.gamma * T, kT=self.kT / E, hbar=1.0)
        record = {"length_unit": L, "time_unit": T, "mass_unit": M, "energy_unit": E}
        return scaled, record


@dataclass(frozen=True)
class DerivedScales:
    """Derived constants: a_sq = 4 m gamma kT / hbar^2, the localization
    rate alpha = sqrt(gamma kT / hbar), momentum diffusion D = 2 m gamma kT,
    the complex kernel frequency omega = alpha (1 - i) and t_loc = 1/alpha."""

    m: float
    hbar: float
    a_sq: float
    alpha: float
    D: float
    t_loc: float
    omega: complex

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "a_sq": self.a_sq, "D": self.D, "t_loc": self.t_loc}


@dataclass(frozen=True)
class TimescaleReport:
    """Decoherence / localization / relaxation times for a given separation.

    The ordering t_dec < t_loc < t_relax holds for macroscopic-ish
    parameters; it is measured here, never assumed."""

    t_decoherence: float
    t_loc: float
    t_relax: float
    ordered: bool


def derive_scales(p: ModelParams) -> DerivedScales:
    """Compute the derived constants for a parameter set."""
    a_sq = 4.0 * p.m * p.gamma * p.kT / p.hbar**2
    alpha = math.sqrt(p.gamma * p.kT / p.hbar)
    # cross-check the equivalent algebraic form
    alpha2 = math.sqrt(p.hbar * a_sq / (4.0 * p.m))
    assert abs(alpha - alpha2) <= 1e-12 * alpha
    D = 2.0 * p.m * p.gamma * p.kT
    return DerivedScales(
        m=p.m,
        hbar=p.hbar,
        a_sq=a_sq,
        alpha=alpha,
        D=D,
        t_loc=1.0 / alpha,
        omega=alpha * (1.0 - 1.0j),
    )


def timescales(p: ModelParams, ell: float) -> TimescaleReport:
    """Characteristic times for an initial superposition of packets a
    distance `ell` apart."""
    if not (ell > 0.0 and math.isfinite(ell)):
        raise DomainError(f"separation ell must be positive and finite, got {ell}")
    s = derive_scales(p)
    t_dec = p.hbar**2 / (ell**2 * p.m * p.gamma * p.kT)
    t_relax = 1.0 / p.gamma
    return TimescaleReport(
        t_decoherence=t_dec,
        t_loc=s.t_loc,
        t_relax=t_relax,
        ordered=(t_dec < s.t_loc < t_relax),
    )


def params_from_config(text: str) -> ModelParams:
    """Parse a `[model]` section with keys m, gamma, kT, hbar from a
    plain-text key-value config."""
    import configparser

    cp = configparser.ConfigParser()
    cp.read_string(text)
    if "model" not in cp:
        raise DomainError("config has no [model] section")
    sec = cp["model"]
    kwargs = {}
    for name in _FIELDS:
        if name not in sec:
            raise DomainError(f"[model] section missing key {name!r}")
        try:
            kwargs[name] = float(sec[name])
        except ValueError as exc:
            raise DomainError(f"[model] key {name!r} is not a decimal literal: {sec[name]!r}") from exc
    return ModelParams(**kwargs)


def scales_json(s: DerivedScales) -> str:
    """JSON echo of the derived scales, as emitted by the CLI."""
    return json.dumps(s.as_dict())
