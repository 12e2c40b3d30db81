"""Thermochemistry and kinetics of the reverse water-gas shift.

    CO2 + H2 <=> CO + H2O

Species heat capacities come from a versioned Shomate table shipped in
``data/``. All temperatures are in kelvin, pressures in pascal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .constants import R_GAS, T_STANDARD
from .errors import DomainError, ThermoRangeError

SPECIES = ("CO2", "H2", "CO", "H2O", "inert")
STOICH = np.array([-1.0, -1.0, 1.0, 1.0, 0.0])
# table name used for each feed species
TABLE_NAME = {"CO2": "CO2", "H2": "H2", "CO": "CO", "H2O": "H2O", "inert": "N2"}
DEFAULT_TABLE = "thermo_shomate_v1.csv"
KEQ_RANGE = (400.0, 1400.0)


@dataclass(frozen=True)
class _Piece:
    t_min: float
    t_max: float
    coeffs: tuple

    def cp(self, T):
        A, B, C, D, E = self.coeffs
        t = T / 1000.0
        return A + B * t + C * t**2 + D * t**3 + E / t**2

    def h_int(self, T):
        # antiderivative of cp dT
        A, B, C, D, E = self.coeffs
        t = T / 1000.0
        return 1000.0 * (A * t + B * t**2 / 2 + C * t**3 / 3 + D * t**4 / 4 - E / t)

    def s_int(self, T):
        # antiderivative of cp / T dT
        A, B, C, D, E = self.coeffs
        t = T / 1000.0
        return A * np.log(t) + B * t + C * t**2 / 2 + D * t**3 / 3 - E / (2 * t**2)


@dataclass(frozen=True)
class _SpeciesData:
    pieces: tuple
    h_f: float
    s_f: float

    def _segments(self, T):
        edges = np.array([p.t_min for p in self.pieces[1:]])
        return np.searchsorted(edges, T, side="right")

    def cp(self, T):
        T = np.asarray(T, dtype=float)
        idx = self._segments(T)
        out = np.empty_like(T)
        for i, p in enumerate(self.pieces):
            m = idx == i
            out[m] = p.cp(T[m])
        return out

    def _cumulative(self, T, kind):
        # integral from T_STANDARD to T, summed piecewise
        T = np.asarray(T, dtype=float)
        out = np.zeros_like(T)
        for p in self.pieces:
            fn = p.h_int if kind == "h" else p.s_int
            lo = np.clip(np.minimum(T, T_STANDARD), p.t_min, p.t_max)
            hi = np.clip(np.maximum(T, T_STANDARD), p.t_min, p.t_max)
            sign = np.where(T >= T_STANDARD, 1.0, -1.0)
            out += sign * (fn(hi) - fn(lo))
        return out

    def h(self, T):
        return self.h_f + self._cumulative(T, "h")

    def s(self, T):
        return self.s_f + self._cumulative(T, "s")


@dataclass(frozen=True)
class ThermoTable:
    species: dict = field(hash=False)
    t_min: float = 250.0
    t_max: float = 1400.0
    source: str = ""

    def __hash__(self):
        return hash(self.source)

    def check(self, T):
        T = np.asarray(T, dtype=float)
        if np.any(T < self.t_min - 1e-9) or np.any(T > self.t_max + 1e-9):
            raise ThermoRangeError(
                f"temperature outside table validity [{self.t_min}, {self.t_max}] K")

    def _get(self, name):
        return self.species[TABLE_NAME.get(name, name)]

    def cp(self, name, T):
        return self._get(name).cp(T)

    def h(self, name, T):
        """Absolute molar enthalpy (formation + sensible), J/mol."""
        return self._get(name).h(T)

    def h_sensible(self, name, T):
        return self._get(name).h(T) - self._get(name).h_f

    def s(self, name, T):
        return self._get(name).s(T)

    def cp_vector(self, T):
        """cp of every feed species, shape (5,) + T.shape."""
        return np.stack([self.cp(n, T) for n in SPECIES])

    def h_vector(self, T):
        return np.stack([self.h(n, T) for n in SPECIES])


def load_table(path=None) -> ThermoTable:
    """Read a Shomate CSV (comment lines start with '#')."""
    if path is None:
        text = resources.files("metareactor").joinpath("data", DEFAULT_TABLE).read_text()
        source = DEFAULT_TABLE
    else:
        text = Path(path).read_text()
        source = str(path)
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    pieces, hf, sf = {}, {}, {}
    for rec in csv.DictReader(rows):
        name = rec["species"].strip()
        coeffs = tuple(float(rec[k]) for k in "ABCDE")
        pieces.setdefault(name, []).append(
            _Piece(float(rec["T_min_K"]), float(rec["T_max_K"]), coeffs))
        hf[name] = float(rec["H_f_J_per_mol"])
        sf[name] = float(rec["S_f_J_per_mol_K"])
    species = {}
    lo, hi = -math.inf, math.inf
    for name, ps in pieces.items():
        ps.sort(key=lambda p: p.t_min)
        for a, b in zip(ps, ps[1:]):
            if abs(a.t_max - b.t_min) > 1e-9:
                raise DomainError(f"{name}: temperature ranges must be contiguous")
        lo, hi = max(lo, ps[0].t_min), min(hi, ps[-1].t_max)
        species[name] = _SpeciesData(tuple(ps), hf[name], sf[name])
    table = ThermoTable(species=species, t_min=lo, t_max=hi, source=source)
    grid = np.linspace(lo, hi, 200)
    for name in species:
        if np.any(table.cp(name, grid) <= 0):
            raise DomainError(f"{name}: non-positive cp inside table range")
    return table


@lru_cache(maxsize=1)
def default_table() -> ThermoTable:
    return load_table()


def _table(table):
    return default_table() if table is None else table


# --------------------------------------------------------------------------
# reaction properties

def delta_h_rxn(T, table=None):
    tab = _table(table)
    tab.check(T)
    return np.tensordot(STOICH[:4], np.stack([tab.h(n, T) for n in SPECIES[:4]]), axes=1)


def delta_s_rxn(T, table=None):
    tab = _table(table)
    tab.check(T)
    return np.tensordot(STOICH[:4], np.stack([tab.s(n, T) for n in SPECIES[:4]]), axes=1)


def delta_g_rxn(T, table=None):
    return delta_h_rxn(T, table) - T * delta_s_rxn(T, table)


def rwgs_equilibrium_constant(T, table=None):
    """K = exp(-dG/(R T)); equimolar reaction so K is pressure independent."""
    T_arr = np.asarray(T, dtype=float)
    if np.any(T_arr < KEQ_RANGE[0]) or np.any(T_arr > KEQ_RANGE[1]):
        raise ThermoRangeError(f"Keq valid for {KEQ_RANGE[0]:g}-{KEQ_RANGE[1]:g} K")
    K = np.exp(-delta_g_rxn(T_arr, table) / (R_GAS * T_arr))
    return float(K) if K.ndim == 0 else K


# --------------------------------------------------------------------------
# feed and equilibrium

@dataclass(frozen=True)
class GasFeed:
    molar_flow_total: float  # mol/s
    mole_fractions: tuple  # ordered as SPECIES
    inlet_temperature: float = 298.15
    pressure: float = 101325.0

    def __post_init__(self):
        y = np.asarray(self.mole_fractions, dtype=float)
        if y.shape != (5,):
            raise DomainError("mole_fractions needs five entries (CO2, H2, CO, H2O, inert)")
        if np.any(y < 0) or np.any(y > 1) or abs(y.sum() - 1.0) > 1e-9:
            raise DomainError("mole fractions must lie in [0, 1] and sum to 1")
        if self.molar_flow_total < 0 or self.pressure <= 0:
            raise DomainError("flow must be non-negative and pressure positive")

    @classmethod
    def from_dict(cls, molar_flow_total, fractions: dict, **kw):
        unknown = set(fractions) - set(SPECIES)
        if unknown:
            raise DomainError(f"unknown species {sorted(unknown)}")
        y = tuple(float(fractions.get(s, 0.0)) for s in SPECIES)
        return cls(molar_flow_total, y, **kw)

    @classmethod
    def h2_co2(cls, ratio, molar_flow_total=1.0, **kw):
        """Binary H2/CO2 feed with H2:CO2 = ratio:1."""
        y_c = 1.0 / (1.0 + ratio)
        return cls(molar_flow_total, (y_c, 1.0 - y_c, 0.0, 0.0, 0.0), **kw)

    @property
    def y(self):
        return np.asarray(self.mole_fractions, dtype=float)

    @property
    def species_flows(self):
        return self.molar_flow_total * self.y

    def with_flow(self, molar_flow_total):
        return GasFeed(molar_flow_total, self.mole_fractions, self.inlet_temperature, self.pressure)


def _extent_bounds(n):
    n_co2, n_h2, n_co, n_h2o = n[:4]
    return -min(n_co, n_h2o), min(n_co2, n_h2)


def equilibrium_extent(n, K):
    """Extent per unit feed for species amounts ``n`` (ordered as SPECIES)."""
    n_co2, n_h2, n_co, n_h2o = n[:4]
    lo, hi = _extent_bounds(n)
    if hi - lo <= 0:
        return 0.0

    def g(x):
        return (n_co + x) * (n_h2o + x) - K * (n_co2 - x) * (n_h2 - x)

    # g is increasing on [lo, hi]: g(lo) <= 0 <= g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def equilibrium_conversion(feed: GasFeed, T: float, table=None) -> float:
    """Equilibrium CO2 conversion by bisection on the reaction extent."""
    y = feed.y
    if y[0] <= 0:
        raise DomainError("feed contains no CO2")
    K = rwgs_equilibrium_constant(T, table)
    return equilibrium_extent(y, K) / y[0]


def calibrate_h2_ratio(target_conversion=0.55, T=823.15, table=None, bracket=(1.0, 20.0)):
    """H2:CO2 ratio whose equilibrium conversion at ``T`` equals the target."""
    def g(ratio):
        return equilibrium_conversion(GasFeed.h2_co2(ratio), T, table) - target_conversion

    return brentq(g, *bracket, xtol=1e-12)


# --------------------------------------------------------------------------
# kinetics

@dataclass(frozen=True)
class KineticsParams:
    pre_exponential: float  # mol / (s m^3 Pa^2)
    activation_energy: float  # J/mol
    activation_floor_K: float = 703.15  # catalyst inactive below this
    activation_ramp_K: float = 10.0  # linear switch-on above the floor

    def __post_init__(self):
        if self.pre_exponential <= 0 or self.activation_energy <= 0:
            raise DomainError("kinetic parameters must be positive")
        if self.activation_ramp_K < 0:
            raise DomainError("activation_ramp_K must be non-negative")

    def rate_constant(self, T):
        T = np.asarray(T, dtype=float)
        k = self.pre_exponential * np.exp(-self.activation_energy / (R_GAS * T))
        # a hard step leaves the coupled heat/reaction iteration without a
        # fixed point when a cell sits on the floor; ramp it on instead
        if self.activation_ramp_K == 0:
            return np.where(T >= self.activation_floor_K, k, 0.0)
        on = np.clip((T - self.activation_floor_K) / self.activation_ramp_K, 0.0, 1.0)
        return k * on


def rwgs_rate(T, partial_pressures, params: KineticsParams, Keq):
    """Reversible mass-action rate per unit bed volume, mol/(s m^3).

    ``partial_pressures`` maps species name to pressure in Pa.
    """
    p = partial_pressures
    drive = p["CO2"] * p["H2"] - p["CO"] * p["H2O"] / Keq
    out = params.rate_constant(T) * drive
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# duties

def sensible_heat_duty(feed: GasFeed, T_out: float, table=None) -> float:
    """Heat needed to bring the feed from its inlet temperature to ``T_out`` (W)."""
    tab = _table(table)
    if T_out < feed.inlet_temperature:
        raise DomainError("T_out must not be below the inlet temperature")
    tab.check([feed.inlet_temperature, T_out])
    dh = np.array([tab.h(n, T_out) - tab.h(n, feed.inlet_temperature) for n in SPECIES])
    return float(feed.species_flows @ dh)


def reaction_heat_duty(extent_flow: float, T: float, table=None) -> float:
    """extent (mol/s) times the reaction enthalpy at ``T`` (W)."""
    if extent_flow < 0:
        raise DomainError("extent_flow must be non-negative")
    return float(extent_flow * delta_h_rxn(T, table))
