import csv
import io

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.special import jv

from metareactor.constants import MU0
from metareactor.effmed import PowerLaw, Uniform
from metareactor.emfield import (
    SusceptorSpec,
    analytic_field_uniform,
    analytic_power_density_invr2,
    closed_form_power_per_length,
    solve_field,
    solve_radial_helmholtz,
    total_power_from_field,
    uniformity_metric,
)
from metareactor.errors import DomainError


def test_analytic_field_against_scipy_bessel():
    spec = SusceptorSpec(0.05, 0.2, Uniform(300.0))
    f = 2e6
    fld = analytic_field_uniform(spec, f, 0.01, 101)
    k = np.sqrt(-1j * 2 * np.pi * f * 300.0 * MU0)
    ref = 0.01 * jv(0, k * fld.r_grid) / jv(0, k * 0.05)
    np.testing.assert_allclose(fld.B_z, ref, rtol=1e-11)
    assert fld.B_z[-1] == pytest.approx(0.01)
    assert fld.J_phi[0] == 0


def test_low_frequency_power_limit():
    # delta >> R: P/L = pi sigma omega^2 B0^2 R^4 / 16
    sigma, R, f, B0 = 10.0, 0.01, 100.0, 1e-3
    w = 2 * np.pi * f
    expected = np.pi * sigma * w**2 * B0**2 * R**4 / 16
    assert closed_form_power_per_length(sigma, R, f, B0) == pytest.approx(expected, rel=1e-6)


def test_high_frequency_power_limit():
    # delta << R: surface loss 2 pi R * B0^2 / (2 mu0^2 sigma delta) per unit length
    sigma, R, f, B0 = 1e6, 0.1, 1e7, 1e-3
    delta = np.sqrt(1 / (np.pi * sigma * f * MU0))
    expected = 2 * np.pi * R * (B0 / MU0) ** 2 / (2 * sigma * delta)
    assert closed_form_power_per_length(sigma, R, f, B0) == pytest.approx(expected, rel=0.01)


def test_closed_form_matches_field_integral():
    spec = SusceptorSpec(0.0375, 0.3, Uniform(240.4))
    fld = analytic_field_uniform(spec, 3e6, 1.0, 2049)
    assert total_power_from_field(fld, 1.0) == pytest.approx(
        closed_form_power_per_length(240.4, 0.0375, 3e6, 1.0), rel=1e-5)


def test_numeric_matches_independent_ode_for_power_law():
    # integrate (r/sigma) B' = F, F' = i w mu0 r B from the axis with scipy and rescale
    prof = PowerLaw(150.0, 2.0, 5.0, 0.2)
    R, f = 0.15, 3e5
    spec = SusceptorSpec(R, 1.0, prof)
    fld = solve_radial_helmholtz(spec, f, 1.0, 513)
    from metareactor.effmed import sigma_at

    w = 2 * np.pi * f

    def rhs(r, y):
        B = y[0] + 1j * y[1]
        F = y[2] + 1j * y[3]
        dB = F * sigma_at(prof, r, R) / r if r > 0 else 0.0
        dF = 1j * w * MU0 * r * B
        return [dB.real, dB.imag, dF.real, dF.imag]

    sol = solve_ivp(rhs, (1e-9, R), [1, 0, 0, 0], rtol=1e-11, atol=1e-14, dense_output=True)
    Bref = sol.sol(fld.r_grid[1:])
    Bref = Bref[0] + 1j * Bref[1]
    Bref = Bref / Bref[-1]
    np.testing.assert_allclose(fld.B_z[1:], Bref, rtol=2e-6, atol=2e-6)


def test_solve_field_dispatches():
    spec = SusceptorSpec(0.1, 1.0, Uniform(100.0))
    a = solve_field(spec, 1e5, 1.0, 257)
    b = solve_radial_helmholtz(spec, 1e5, 1.0, 257)
    np.testing.assert_allclose(a.B_z, b.B_z, rtol=1e-6, atol=1e-9)


def test_invr2_profile_is_uniform():
    R = 0.3
    spec = SusceptorSpec(R, 1.0, PowerLaw.from_c(0.001, R))
    fld = solve_radial_helmholtz(spec, 1e5, 1.0, 1025)
    assert uniformity_metric(fld, 0.2) < 0.02
    mask = fld.r_grid > 0.2 * R
    ref = analytic_power_density_invr2(0.001, R, 1e5, 1.0, fld.r_grid[mask])
    np.testing.assert_allclose(fld.p_density[mask], ref, rtol=1e-4)


def test_uniformity_metric_low_frequency_quadratic_profile():
    # delta >> R gives p ~ r^2, whose area-weighted CV on (0, R] is 1/sqrt(3)
    spec = SusceptorSpec(0.01, 1.0, Uniform(1.0))
    fld = analytic_field_uniform(spec, 1.0, 1.0, 2049)
    assert uniformity_metric(fld) == pytest.approx(1 / np.sqrt(3), rel=1e-4)


def test_radial_csv_columns():
    spec = SusceptorSpec(0.05, 0.2, Uniform(300.0))
    text = analytic_field_uniform(spec, 1e6, 1.0, 9).to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["r_m", "Re_Bz_T", "Im_Bz_T", "Re_Jphi", "Im_Jphi", "p_W_per_m3"]
    assert len(rows) == 10


def test_domain_checks():
    with pytest.raises(DomainError):
        SusceptorSpec(0.0, 1.0, Uniform(1.0))
    spec = SusceptorSpec(0.05, 0.2, Uniform(300.0))
    with pytest.raises(DomainError):
        solve_radial_helmholtz(spec, -1.0, 1.0)
    with pytest.raises(DomainError):
        solve_radial_helmholtz(spec, 1e5, 1.0, n_nodes=10)
