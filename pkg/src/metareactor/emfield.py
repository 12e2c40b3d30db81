"""Axial magnetic field and eddy-current heating inside a cylindrical susceptor.

Time-harmonic fields use peak phasor amplitudes, so the time-averaged power
density is |J|^2 / (2 sigma). The radial problem for a conductivity that
varies with radius is

    (1/r) d/dr( (r / sigma) dB/dr ) = i omega mu0 B,   B'(0) = 0,  B(R) = B0,

which reduces to the Bessel form B'' + B'/r + k^2 B = 0 when sigma is
constant. The azimuthal current follows from Faraday's law,
J(r) = -(i omega sigma(r) / r) * integral_0^r s B(s) ds, which keeps J(0) = 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import solve_banded

from .bessel import bessel_j
from .constants import MU0
from .effmed import ConductivityProfile, Uniform, resistivity_at, sigma_at
from .errors import ConvergenceError, DomainError, SingularityError


@dataclass(frozen=True)
class SusceptorSpec:
    radius_R: float
    length_L: float
    profile: ConductivityProfile

    def __post_init__(self):
        if self.radius_R <= 0 or self.length_L <= 0:
            raise DomainError("susceptor radius and length must be positive")

    @property
    def volume(self):
        return math.pi * self.radius_R**2 * self.length_L

    def with_profile(self, profile):
        return SusceptorSpec(self.radius_R, self.length_L, profile)


@dataclass(frozen=True)
class RadialField:
    r_grid: np.ndarray
    B_z: np.ndarray
    J_phi: np.ndarray
    p_density: np.ndarray
    applied_B0: float
    frequency: float

    @property
    def radius(self):
        return float(self.r_grid[-1])

    def to_csv(self, fh=None):
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r_m", "Re_Bz_T", "Im_Bz_T", "Re_Jphi", "Im_Jphi", "p_W_per_m3"])
        for row in zip(self.r_grid, self.B_z, self.J_phi, self.p_density):
            r, b, j, p = row
            w.writerow([f"{r:.12g}", f"{b.real:.12g}", f"{b.imag:.12g}",
                        f"{j.real:.12g}", f"{j.imag:.12g}", f"{p:.12g}"])
        return buf.getvalue() if fh is None else None


def wavenumber(sigma, f):
    """Principal root of k^2 = -i omega sigma mu0 (positive real part)."""
    return np.sqrt(-1j * 2 * np.pi * f * np.asarray(sigma) * MU0)


def _check_drive(f, B0):
    if f <= 0:
        raise DomainError("frequency must be positive")
    if not np.isfinite(B0):
        raise DomainError("B0 must be finite")


def analytic_field_uniform(spec: SusceptorSpec, f: float, B0: float, n_nodes: int = 513) -> RadialField:
    """Closed-form Bessel solution for a uniform-conductivity cylinder."""
    if not isinstance(spec.profile, Uniform):
        raise DomainError("analytic solution requires a Uniform profile")
    _check_drive(f, B0)
    sigma = spec.profile.sigma_eff
    R = spec.radius_R
    r = np.linspace(0.0, R, n_nodes)
    k = complex(wavenumber(sigma, f))
    # scaled Bessel values; the exponential factors only enter as ratios
    denom = bessel_j(0, k * R, scaled=True)
    if abs(denom) < 1e-300:
        raise SingularityError("J0(kR) vanishes; check sigma and frequency")
    rel = np.exp(np.abs((k * r).imag) - abs((k * R).imag))
    B = B0 * bessel_j(0, k * r, scaled=True) * rel / denom
    J = (k * B0 / MU0) * bessel_j(1, k * r, scaled=True) * rel / denom
    p = np.abs(J) ** 2 / (2.0 * sigma)
    return RadialField(r, B, J, p, float(B0), float(f))


def closed_form_power_per_length(sigma, R, f, B0):
    """Time-averaged power per unit length of a uniform cylinder in a peak field B0.

    P/L = -(pi omega R^2 B0^2 / (2 mu0)) Im[J2(kR) / J0(kR)] with the
    principal k = (1 - i) / delta; the conjugate argument (1 + i) R / delta
    flips the sign of the imaginary part.
    """
    k = complex(wavenumber(sigma, f))
    x = k * R
    ratio = bessel_j(2, x, scaled=True) / bessel_j(0, x, scaled=True)
    omega = 2 * np.pi * f
    return float(-np.pi * omega * R**2 * B0**2 / (2 * MU0) * ratio.imag)


def _fd_solve(spec: SusceptorSpec, f: float, B0: float, n: int):
    """Second-order conservative finite differences on n uniform nodes."""
    R = spec.radius_R
    h = R / (n - 1)
    r = np.linspace(0.0, R, n)
    faces = (np.arange(n - 1) + 0.5) * h
    w = faces * resistivity_at(spec.profile, faces, R)  # r / sigma at faces
    c = 1j * 2 * np.pi * f * MU0 * h * h

    m = n - 1  # unknowns B_0 .. B_{n-2}
    ab = np.zeros((3, m), dtype=complex)
    rhs = np.zeros(m, dtype=complex)
    # axis control volume [0, h/2]
    ab[1, 0] = -w[0] - c * h / 8.0
    ab[0, 1] = w[0]
    i = np.arange(1, m)
    ab[2, i - 1] = w[i - 1]
    ab[1, i] = -(w[i - 1] + w[i]) - c * r[i]
    ab[0, i[:-1] + 1] = w[i[:-1]]
    rhs[m - 1] = -w[m - 1] * B0
    B = np.empty(n, dtype=complex)
    B[:m] = solve_banded((1, 1), ab, rhs)
    B[m] = B0
    return r, B


def _fields_from_B(spec, f, r, B):
    R = spec.radius_R
    omega = 2 * np.pi * f
    flux = np.zeros_like(B)
    integrand = r * B
    flux[1:] = (cumulative_simpson(integrand.real, x=r)
                + 1j * cumulative_simpson(integrand.imag, x=r))
    J = np.zeros_like(B)
    inner = r > 0
    sig = sigma_at(spec.profile, r[inner], R)
    J[inner] = -1j * omega * sig * flux[inner] / r[inner]
    p = np.zeros(r.shape)
    p[inner] = np.abs(J[inner]) ** 2 / (2.0 * sig)
    return J, p


def solve_radial_helmholtz(
    spec: SusceptorSpec,
    f: float,
    B0: float,
    n_nodes: int = 257,
    rtol: float = 1e-4,
) -> RadialField:
    """Numerical field for any radial conductivity profile.

    Solves on ``n_nodes`` and on the nested grid with half the spacing, and
    returns the Richardson-extrapolated field on the coarse nodes. Raises
    ConvergenceError when the fine-grid error estimate exceeds ``rtol``.
    """
    if n_nodes < 64:
        raise DomainError("n_nodes must be at least 64")
    _check_drive(f, B0)
    r, Bc = _fd_solve(spec, f, B0, n_nodes)
    _, Bf = _fd_solve(spec, f, B0, 2 * n_nodes - 1)
    Bf = Bf[::2]
    scale = max(np.max(np.abs(Bf)), abs(B0), 1e-300)
    err = float(np.max(np.abs(Bf - Bc)) / 3.0 / scale) if B0 != 0 else 0.0
    if err > rtol:
        raise ConvergenceError(
            f"radial field discretization error {err:.2e} exceeds {rtol:.1e}; "
            "increase n_nodes", residual=err)
    B = (4.0 * Bf - Bc) / 3.0
    B[-1] = B0
    J, p = _fields_from_B(spec, f, r, B)
    return RadialField(r, B, J, p, float(B0), float(f))


def solve_field(spec: SusceptorSpec, f: float, B0: float, n_nodes: int = 257) -> RadialField:
    """Analytic solution for uniform profiles, numerical otherwise."""
    if isinstance(spec.profile, Uniform):
        return analytic_field_uniform(spec, f, B0, n_nodes)
    return solve_radial_helmholtz(spec, f, B0, n_nodes)


def analytic_power_density_invr2(C: float, R: float, f: float, B0: float, r):
    """Power density of the ideal sigma = C / r^2 profile, uniform-field estimate.

    Evaluates |k B0 / mu0 * J1(k r) / J0(k R)|^2 / (2 sigma) with the local
    sigma(r) = C / r^2; k r is then independent of r.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r > R * (1 + 1e-12)):
        raise DomainError("r must lie in (0, R]")
    omega = 2 * np.pi * f
    kappa = np.sqrt(-1j * omega * MU0 * C)  # k(r) * r
    num = bessel_j(1, kappa, scaled=True)
    arg = kappa * R / r
    den = bessel_j(0, arg, scaled=True)
    rel = np.exp(abs(kappa.imag) - np.abs(arg.imag))
    p = omega * B0**2 / (2 * MU0) * (np.abs(num) * rel) ** 2 / np.abs(den) ** 2
    return float(p) if p.ndim == 0 else p


def total_power_from_field(field: RadialField, length_L: float) -> float:
    """2 pi L integral p r dr by the trapezoidal rule."""
    r = field.r_grid
    return float(2 * np.pi * length_L * np.trapezoid(field.p_density * r, r))


def uniformity_metric(field: RadialField, inner_cutoff_fraction: float = 0.0) -> float:
    """Volume-weighted coefficient of variation of p over (cutoff R, R]."""
    if not 0.0 <= inner_cutoff_fraction < 1.0:
        raise DomainError("inner_cutoff_fraction must lie in [0, 1)")
    r = field.r_grid
    p = field.p_density
    R = field.radius
    keep = r >= inner_cutoff_fraction * R
    rr, pp = r[keep], p[keep]
    w = np.trapezoid(rr, rr)
    mean = np.trapezoid(pp * rr, rr) / w
    if mean <= 0:
        raise DomainError("mean power density is zero; uniformity undefined")
    var = np.trapezoid((pp - mean) ** 2 * rr, rr) / w
    return float(math.sqrt(max(var, 0.0)) / mean)
