"""Effective-medium conductivity of lattice susceptors.

Covers the Lemlich-limit estimate for open-cell lattices, uniform and
radially tailored conductivity profiles, skin depth, and recovery of an
effective conductivity from a measured AC resistance curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .constants import MU0
from .errors import DomainError, FitError


@dataclass(frozen=True)
class LatticeSpec:
    solid_conductivity: float  # S/m
    porosity: float
    tortuosity: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.porosity < 1.0:
            raise DomainError(f"porosity must lie in (0, 1), got {self.porosity}")
        if self.solid_conductivity <= 0:
            raise DomainError("solid_conductivity must be positive")
        if self.tortuosity < 1.0:
            raise DomainError("tortuosity must be >= 1")


@dataclass(frozen=True)
class Uniform:
    sigma_eff: float  # S/m

    def __post_init__(self):
        if self.sigma_eff <= 0:
            raise DomainError("sigma_eff must be positive")


@dataclass(frozen=True)
class PowerLaw:
    """sigma(r) = (sigma_ref / A) (R / r)^p outside the core, constant inside.

    ``core_fraction = 0`` switches the clamp off (the divergent ideal profile);
    it is only meaningful for field solves that never evaluate sigma at r = 0.
    """

    sigma_ref: float
    exponent_p: float = 2.0
    amplitude_A: float = 1.0
    core_fraction: float = 0.2

    def __post_init__(self):
        if self.sigma_ref <= 0 or self.amplitude_A <= 0:
            raise DomainError("sigma_ref and amplitude_A must be positive")
        if not 0.0 <= self.core_fraction < 1.0:
            raise DomainError("core_fraction must lie in [0, 1)")

    @classmethod
    def from_c(cls, c, radius, exponent_p=2.0):
        """Unclamped profile sigma = C / r^p written in (sigma_ref, A) form."""
        return cls(sigma_ref=c / radius**exponent_p, exponent_p=exponent_p,
                   amplitude_A=1.0, core_fraction=0.0)


ConductivityProfile = Union[Uniform, PowerLaw]


@dataclass(frozen=True)
class ImpedanceSample:
    frequency: float  # Hz
    resistance: float  # ohm

    def __post_init__(self):
        if self.frequency <= 0 or self.resistance <= 0:
            raise DomainError("frequency and resistance must be positive")


def lemlich_sigma_eff(lattice: LatticeSpec) -> float:
    """Lemlich-limit conductivity sigma_s (1 - eps) / (3 tau)."""
    return lattice.solid_conductivity * (1.0 - lattice.porosity) / (3.0 * lattice.tortuosity)


def _check_radius(r, R):
    r = np.asarray(r, dtype=float)
    if R <= 0:
        raise DomainError("radius R must be positive")
    if np.any(r < 0) or np.any(r > R * (1 + 1e-12)):
        raise DomainError("r must lie in [0, R]")
    return r


def sigma_at(profile: ConductivityProfile, r, R: float):
    """Local conductivity (S/m) at radius ``r`` of a susceptor of radius ``R``."""
    r = _check_radius(r, R)
    if isinstance(profile, Uniform):
        out = np.full(r.shape, profile.sigma_eff)
    else:
        base = profile.sigma_ref / profile.amplitude_A
        core = profile.core_fraction * R
        with np.errstate(divide="ignore"):
            out = base * (R / np.maximum(r, core)) ** profile.exponent_p
    return float(out) if out.ndim == 0 else out


def resistivity_at(profile: ConductivityProfile, r, R: float):
    """1/sigma, finite (zero) on the axis of an unclamped power law."""
    r = _check_radius(r, R)
    if isinstance(profile, Uniform):
        out = np.full(r.shape, 1.0 / profile.sigma_eff)
    else:
        base = profile.sigma_ref / profile.amplitude_A
        rr = np.maximum(r, profile.core_fraction * R)
        out = (rr / R) ** profile.exponent_p / base
    return float(out) if out.ndim == 0 else out


def skin_depth(sigma: float, f: float) -> float:
    """Penetration depth sqrt(1 / (pi sigma f mu0)) in metres."""
    if sigma <= 0 or f <= 0:
        raise DomainError("sigma and f must be positive")
    return math.sqrt(1.0 / (math.pi * sigma * f * MU0))


def sigma_for_delta_ratio(R: float, f: float, ratio: float) -> float:
    """Conductivity whose skin depth at ``f`` equals ``ratio * R``."""
    if R <= 0 or f <= 0 or ratio <= 0:
        raise DomainError("R, f and ratio must be positive")
    return 1.0 / (math.pi * f * MU0 * (ratio * R) ** 2)


@dataclass(frozen=True)
class FitResult:
    sigma_eff: float
    residual: float  # RMS of log(R_meas / R_model)
    n_samples: int


def fit_sigma_from_impedance(
    samples: Sequence[ImpedanceSample],
    susceptor_geometry,
    coil,
    *,
    sigma_bounds=(1e-2, 1e7),
    max_residual=0.15,
) -> FitResult:
    """Least-squares effective conductivity from an R(f) curve.

    ``susceptor_geometry`` is any object with ``radius_R`` and ``length_L``
    (a SusceptorSpec works; its profile is ignored). The misfit is taken on
    log resistance because the curve spans decades.
    """
    from .circuit import susceptor_resistance
    from .emfield import SusceptorSpec

    if len(samples) < 5:
        raise FitError("need at least 5 impedance samples")
    freqs = np.array([s.frequency for s in samples])
    log_meas = np.log([s.resistance for s in samples])
    R, L = susceptor_geometry.radius_R, susceptor_geometry.length_L

    def misfit(log_sigma):
        spec = SusceptorSpec(R, L, Uniform(math.exp(log_sigma)))
        model = np.array([susceptor_resistance(spec, coil, f) for f in freqs])
        return float(np.sum((log_meas - np.log(model)) ** 2))

    lo, hi = (math.log(b) for b in sigma_bounds)
    grid = np.linspace(lo, hi, 91)
    values = np.array([misfit(g) for g in grid])
    i = int(np.argmin(values))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    opt = minimize_scalar(misfit, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10, "maxiter": 500})
    if not opt.success:
        raise FitError(f"optimizer did not converge: {opt.message}")
    residual = math.sqrt(opt.fun / len(samples))
    if residual > max_residual:
        raise FitError(f"fit residual {residual:.3g} exceeds {max_residual:.3g}")
    return FitResult(sigma_eff=math.exp(opt.x), residual=residual, n_samples=len(samples))


def profile_to_dict(profile: ConductivityProfile) -> dict:
    if isinstance(profile, Uniform):
        return {"sigma_eff_s_per_m": profile.sigma_eff, "profile": {"kind": "uniform"}}
    return {
        "sigma_eff_s_per_m": profile.sigma_ref,
        "profile": {
            "kind": "power_law",
            "p": profile.exponent_p,
            "A": profile.amplitude_A,
            "core_fraction": profile.core_fraction,
        },
    }


def profile_from_dict(data: dict) -> ConductivityProfile:
    sigma = float(data["sigma_eff_s_per_m"])
    prof = data.get("profile", {"kind": "uniform"})
    kind = prof.get("kind", "uniform")
    if kind == "uniform":
        return Uniform(sigma)
    if kind == "power_law":
        return PowerLaw(
            sigma_ref=sigma,
            exponent_p=float(prof.get("p", 2.0)),
            amplitude_A=float(prof.get("A", 1.0)),
            core_fraction=float(prof.get("core_fraction", 0.2)),
        )
    raise DomainError(f"unknown profile kind {kind!r}")
