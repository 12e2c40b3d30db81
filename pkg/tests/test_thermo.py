import math

import numpy as np
import pytest

from metareactor.constants import R_GAS
from metareactor.errors import DomainError, ThermoRangeError
from metareactor.thermo import (
    GasFeed,
    KineticsParams,
    calibrate_h2_ratio,
    default_table,
    delta_g_rxn,
    delta_h_rxn,
    equilibrium_conversion,
    equilibrium_extent,
    reaction_heat_duty,
    rwgs_equilibrium_constant,
    rwgs_rate,
    sensible_heat_duty,
)

# JANAF-tabulated values
N2_CP = {300: 29.125, 400: 29.249, 500: 29.580, 600: 30.110, 700: 30.754, 800: 31.433, 900: 32.090}
DFG = {  # kJ/mol at 800 K and 900 K
    "CO": (-182.494, -191.416),
    "H2O": (-203.606, -198.083),
    "CO2": (-395.790, -395.960),
}


def janaf_keq(T):
    g800 = DFG["CO"][0] + DFG["H2O"][0] - DFG["CO2"][0]
    g900 = DFG["CO"][1] + DFG["H2O"][1] - DFG["CO2"][1]
    g = g800 + (g900 - g800) * (T - 800) / 100
    return math.exp(-g * 1e3 / (R_GAS * T))


@pytest.mark.parametrize("T,cp", sorted(N2_CP.items()))
def test_n2_heat_capacity(T, cp):
    assert default_table().cp("inert", T) == pytest.approx(cp, abs=0.05)


def test_reaction_enthalpy_standard():
    assert delta_h_rxn(298.15) == pytest.approx(41.17e3, abs=200)


def test_equilibrium_constant_against_janaf():
    for T in (800.0, 823.15, 900.0):
        assert rwgs_equilibrium_constant(T) == pytest.approx(janaf_keq(T), rel=0.03)


def test_equilibrium_constant_crosses_unity_near_1100K():
    from scipy.optimize import brentq

    T1 = brentq(lambda T: delta_g_rxn(T), 900, 1300)
    assert 1050 < T1 < 1140


def test_keq_range_enforced():
    with pytest.raises(ThermoRangeError):
        rwgs_equilibrium_constant(300.0)


def test_equilibrium_equimolar_feed_closed_form():
    # 1:1 CO2:H2 -> x^2 / (1 - x)^2 = K
    feed = GasFeed.h2_co2(1.0)
    K = rwgs_equilibrium_constant(823.15)
    x = math.sqrt(K) / (1 + math.sqrt(K))
    assert equilibrium_conversion(feed, 823.15) == pytest.approx(x, rel=1e-8)


def test_calibrated_ratio_reaches_55_percent():
    ratio = calibrate_h2_ratio(0.55, 823.15)
    assert 2.5 < ratio < 3.5
    assert equilibrium_conversion(GasFeed.h2_co2(ratio), 823.15) == pytest.approx(0.55, abs=1e-6)


def test_extent_respects_bounds():
    n = np.array([1.0, 0.2, 0.0, 0.0, 0.0])
    x = equilibrium_extent(n, 1e6)
    assert 0 < x <= 0.2


def test_rate_vanishes_at_equilibrium_and_below_floor():
    kin = KineticsParams(4e-3, 8e4)
    T = 823.15
    K = rwgs_equilibrium_constant(T)
    feed = GasFeed.h2_co2(3.0)
    x = equilibrium_conversion(feed, T)
    y = feed.y
    n = y + np.array([-1, -1, 1, 1, 0]) * y[0] * x
    pp = dict(zip(("CO2", "H2", "CO", "H2O"), n[:4] * 101325.0))
    assert abs(rwgs_rate(T, pp, kin, K)) < 1e-12 * kin.rate_constant(T) * 101325.0**2
    assert kin.rate_constant(700.0) == 0.0
    assert kin.rate_constant(713.15) == pytest.approx(4e-3 * math.exp(-8e4 / (R_GAS * 713.15)))


def test_duties():
    feed = GasFeed.from_dict(1.0, {"inert": 1.0})
    assert sensible_heat_duty(feed, 823.15) == pytest.approx(15.78e3, rel=0.01)
    assert reaction_heat_duty(1.0, 823.15) == pytest.approx(delta_h_rxn(823.15))


def test_feed_validation():
    with pytest.raises(DomainError):
        GasFeed(1.0, (0.5, 0.4, 0, 0, 0))
    with pytest.raises(DomainError):
        GasFeed.from_dict(1.0, {"CH4": 1.0})
