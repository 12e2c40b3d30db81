"""Coil-side electrical model.

Currents are RMS. The solenoid field returned by :func:`biot_savart_bz` is
therefore an RMS amplitude; it is converted to a peak phasor before the
susceptor field solve.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import simpson

from .constants import COPPER_CONDUCTIVITY, INCH, MU0
from .effmed import Uniform, skin_depth
from .emfield import SusceptorSpec, closed_form_power_per_length, solve_radial_helmholtz, total_power_from_field
from .errors import BracketError, DomainError


class CoilValidityWarning(UserWarning):
    """Coil resistance model used outside its high-frequency validity range."""


@dataclass(frozen=True)
class CoilSpec:
    turns_N: int
    coil_radius_Rc: float
    half_length_Lc: float
    conductor_radius_ac: float
    pitch_p: float
    conductor_conductivity: float = COPPER_CONDUCTIVITY
    wire_diameter_d: float | None = None

    def __post_init__(self):
        if self.turns_N < 1:
            raise DomainError("coil needs at least one turn")
        lengths = (self.coil_radius_Rc, self.half_length_Lc, self.conductor_radius_ac, self.pitch_p)
        if min(lengths) <= 0 or self.conductor_conductivity <= 0:
            raise DomainError("coil lengths and conductivity must be positive")
        if self.pitch_p <= 2 * self.conductor_radius_ac:
            raise DomainError("pitch must exceed the conductor diameter (turns overlap)")
        if self.wire_diameter_d is None:
            object.__setattr__(self, "wire_diameter_d", 2 * self.conductor_radius_ac)

    @property
    def diameter(self):
        return 2 * self.coil_radius_Rc


@dataclass(frozen=True)
class DrivePoint:
    frequency_f: float
    rms_current_I: float

    def __post_init__(self):
        if self.frequency_f <= 0 or self.rms_current_I < 0:
            raise DomainError("frequency must be positive and current non-negative")


@dataclass(frozen=True)
class CircuitReport:
    R_susc: float
    R_coil: float
    eta_coupling: float

    @classmethod
    def from_resistances(cls, R_susc, R_coil):
        return cls(R_susc, R_coil, coupling_efficiency(R_susc, R_coil))


@dataclass(frozen=True)
class SrfReport:
    L_henry: float
    C_farad: float
    f_res: float


def biot_savart_bz(coil: CoilSpec, I: float, z):
    """On-axis field of a finite solenoid spanning [-Lc, Lc].

    mu0 N I / (4 L) * (cos a1 + cos a2) with L taken as the full coil
    length 2 Lc.
    """
    z = np.asarray(z, dtype=float)
    Lc, Rc = coil.half_length_Lc, coil.coil_radius_Rc
    total = 2 * Lc
    a = (z + Lc) / np.sqrt((z + Lc) ** 2 + Rc**2)
    b = (Lc - z) / np.sqrt((Lc - z) ** 2 + Rc**2)
    out = MU0 * coil.turns_N * I / (4 * total) * (a + b)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=4096)
def _unit_power_per_length(R, profile, f, n_nodes):
    """Dissipation per metre of susceptor for a 1 T peak applied field."""
    if isinstance(profile, Uniform):
        return closed_form_power_per_length(profile.sigma_eff, R, f, 1.0)
    field = solve_radial_helmholtz(SusceptorSpec(R, 1.0, profile), f, 1.0, n_nodes)
    return total_power_from_field(field, 1.0)


def axial_field_profile(spec: SusceptorSpec, coil: CoilSpec, I: float, n_slices: int = 65):
    """Slice centres and RMS applied field along a susceptor centred in the coil."""
    z = np.linspace(-spec.length_L / 2, spec.length_L / 2, n_slices)
    return z, biot_savart_bz(coil, I, z)


def susceptor_power(spec: SusceptorSpec, coil: CoilSpec, drive: DrivePoint,
                    n_slices: int = 65, n_nodes: int = 513) -> float:
    """Time-averaged eddy-current dissipation in the susceptor (W).

    Each axial slice sees the local solenoid field; radial solves are
    linear in the applied field so one unit solve serves every slice.
    """
    if n_slices % 2 == 0:
        n_slices += 1
    z, b_rms = axial_field_profile(spec, coil, drive.rms_current_I, n_slices)
    b_peak_sq = 2.0 * b_rms**2
    unit = _unit_power_per_length(spec.radius_R, spec.profile, drive.frequency_f, n_nodes)
    return float(unit * simpson(b_peak_sq, x=z))


def susceptor_resistance(spec: SusceptorSpec, coil: CoilSpec, f: float,
                         n_slices: int = 65, n_nodes: int = 513) -> float:
    """AC resistance P_diss / I^2 seen by the coil (ohm)."""
    return susceptor_power(spec, coil, DrivePoint(f, 1.0), n_slices, n_nodes)


def coil_resistance_dowell(coil: CoilSpec, f: float) -> float:
    """Improved-Dowell AC resistance with d read as the coil diameter 2 Rc."""
    if f <= 0:
        raise DomainError("frequency must be positive")
    sc = coil.conductor_conductivity
    delta_c = skin_depth(sc, f)
    if delta_c > coil.conductor_radius_ac / 3:
        warnings.warn(
            f"conductor skin depth {delta_c:.3g} m is not small against radius "
            f"{coil.conductor_radius_ac:.3g} m; Dowell estimate is unreliable",
            CoilValidityWarning, stacklevel=2)
    d = coil.diameter
    N = coil.turns_N
    return (math.pi**0.75 * d * N**1.5
            / (sc * delta_c * math.sqrt(2 * coil.conductor_radius_ac * coil.half_length_Lc)))


def coupling_efficiency(R_susc: float, R_coil: float) -> float:
    if R_susc < 0 or R_coil < 0:
        raise DomainError("resistances must be non-negative")
    if R_susc == 0 and R_coil == 0:
        raise DomainError("coupling efficiency undefined when both resistances vanish")
    return R_susc / (R_susc + R_coil)


def circuit_report(spec: SusceptorSpec, coil: CoilSpec, f: float, **kw) -> CircuitReport:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoilValidityWarning)
        rc = coil_resistance_dowell(coil, f)
    return CircuitReport.from_resistances(susceptor_resistance(spec, coil, f, **kw), rc)


def find_f_ideal(spec: SusceptorSpec, bracket=(1e2, 1e9), rtol: float = 1e-6) -> float:
    """Frequency at which the skin depth equals half the susceptor radius."""
    if not isinstance(spec.profile, Uniform):
        raise DomainError("f_ideal is defined for uniform profiles")
    sigma = spec.profile.sigma_eff
    target = spec.radius_R / 2

    def g(f):
        return skin_depth(sigma, f) - target

    lo, hi = bracket
    if g(lo) * g(hi) > 0:
        raise BracketError(f"skin depth does not cross R/2 between {lo:g} and {hi:g} Hz")
    while hi / lo - 1 > rtol:
        mid = math.sqrt(lo * hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi)


def coil_srf(coil: CoilSpec) -> SrfReport:
    """Wheeler inductance, Medhurst capacitance and self-resonant frequency.

    Wheeler: L[uH] = r^2 N^2 / (9 r + 10 Lc) with inches; Lc is the coil's
    half length, the same symbol used for the solenoid field.
    Medhurst: C[pF] = 2 pi D[cm] / arccosh(p / d_wire).
    """
    ratio = coil.pitch_p / coil.wire_diameter_d
    if ratio <= 1:
        raise DomainError(
            f"pitch / wire diameter = {ratio:.3g} <= 1; arccosh undefined "
            "(increase pitch or use thinner wire)")
    r_in = coil.coil_radius_Rc / INCH
    l_in = coil.half_length_Lc / INCH
    L_uH = r_in**2 * coil.turns_N**2 / (9 * r_in + 10 * l_in)
    C_pF = 2 * math.pi * (coil.diameter * 100) / math.acosh(ratio)
    L = L_uH * 1e-6
    C = C_pF * 1e-12
    return SrfReport(L, C, 1.0 / (2 * math.pi * math.sqrt(L * C)))


def operable_region(beta: float, f: float, coil: CoilSpec) -> bool:
    """True when ``f`` lies below the coil self-resonance (``beta`` is informational)."""
    return f < coil_srf(coil).f_res
