import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metareactor.circuit import susceptor_resistance
from metareactor.effmed import (
    ImpedanceSample,
    LatticeSpec,
    PowerLaw,
    Uniform,
    fit_sigma_from_impedance,
    lemlich_sigma_eff,
    profile_from_dict,
    profile_to_dict,
    resistivity_at,
    sigma_at,
    sigma_for_delta_ratio,
    skin_depth,
)
from metareactor.emfield import SusceptorSpec
from metareactor.errors import DomainError, FitError


def test_lemlich_limit():
    # SiSiC-like solid, 90 % open
    assert lemlich_sigma_eff(LatticeSpec(1.0e5, 0.9)) == pytest.approx(1.0e5 * 0.1 / 3)
    assert lemlich_sigma_eff(LatticeSpec(1.0e5, 0.9, 2.0)) == pytest.approx(1.0e5 * 0.1 / 6)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
def test_lattice_rejects_bad_porosity(eps):
    with pytest.raises(DomainError):
        LatticeSpec(1e5, eps)


def test_skin_depth_reference_points():
    assert skin_depth(113.4, 1e5) == pytest.approx(0.1494, abs=2e-4)
    assert skin_depth(240.4, 3e6) == pytest.approx(0.01874, abs=2e-5)
    # copper at 60 Hz, about 8.4 mm
    assert skin_depth(5.8e7, 60) == pytest.approx(8.53e-3, rel=5e-3)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 10), st.floats(1e2, 1e8), st.floats(0.05, 2))
def test_delta_ratio_inverts_skin_depth(R, f, ratio):
    sigma = sigma_for_delta_ratio(R, f, ratio)
    assert skin_depth(sigma, f) == pytest.approx(ratio * R, rel=1e-12)


def test_power_law_profile_values():
    prof = PowerLaw(113.4, 2.0, 7.2, 0.2)
    R = 0.3
    assert sigma_at(prof, R, R) == pytest.approx(113.4 / 7.2)
    assert sigma_at(prof, 0.5 * R, R) == pytest.approx(4 * 113.4 / 7.2)
    # clamped inside the core
    assert sigma_at(prof, 0.0, R) == pytest.approx(25 * 113.4 / 7.2)
    assert sigma_at(prof, 0.1 * R, R) == pytest.approx(25 * 113.4 / 7.2)


def test_unclamped_profile_resistivity_vanishes_on_axis():
    prof = PowerLaw.from_c(0.001, 0.3)
    assert resistivity_at(prof, 0.0, 0.3) == 0.0
    assert sigma_at(prof, 0.15, 0.3) == pytest.approx(0.001 / 0.15**2)


def test_uniform_profile_is_flat():
    r = np.linspace(0, 0.1, 11)
    np.testing.assert_array_equal(sigma_at(Uniform(50.0), r, 0.1), 50.0)


def test_sigma_at_outside_radius_rejected():
    with pytest.raises(DomainError):
        sigma_at(Uniform(1.0), 0.2, 0.1)


def test_profile_dict_roundtrip():
    for prof in (Uniform(12.5), PowerLaw(100.0, 1.5, 3.0, 0.1)):
        assert profile_from_dict(profile_to_dict(prof)) == prof


def test_fit_recovers_sigma_from_synthetic_curve(lab_coil):
    geom = SusceptorSpec(0.019, 0.150, Uniform(1.0))
    truth = SusceptorSpec(0.019, 0.150, Uniform(400.0))
    rng = np.random.default_rng(7)
    freqs = np.geomspace(1e5, 3e7, 15)
    samples = [ImpedanceSample(f, susceptor_resistance(truth, lab_coil, f) * math.exp(rng.normal(0, 0.01)))
               for f in freqs]
    fit = fit_sigma_from_impedance(samples, geom, lab_coil)
    assert fit.sigma_eff == pytest.approx(400.0, rel=0.02)
    assert fit.residual < 0.02


def test_fit_rejects_inconsistent_data(lab_coil):
    geom = SusceptorSpec(0.019, 0.150, Uniform(1.0))
    samples = [ImpedanceSample(f, r) for f, r in zip(np.geomspace(1e5, 1e7, 6), [1, 100, 1, 100, 1, 100])]
    with pytest.raises(FitError):
        fit_sigma_from_impedance(samples, geom, lab_coil)


def test_fit_needs_enough_samples(lab_coil):
    geom = SusceptorSpec(0.019, 0.150, Uniform(1.0))
    with pytest.raises(FitError):
        fit_sigma_from_impedance([ImpedanceSample(1e6, 1.0)] * 3, geom, lab_coil)
