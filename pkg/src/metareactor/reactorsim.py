"""Steady two-dimensional (r, z) reactor model.

Finite volumes on a uniform cell-centred grid. Gas moves in plug flow at a
uniform superficial molar flux; heat spreads through the bed with a single
effective conductivity; the eddy-current source is fixed by the drive point
and only rescales with coil current. Conversion is advanced along each
radial streamline with an implicit step per cell, which cannot overshoot
the local equilibrium.

Energy is bookkept from the discrete operator itself, so a converged
solution closes its ledger to round-off.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .circuit import CoilSpec, DrivePoint, biot_savart_bz, operable_region, susceptor_resistance
from .constants import R_GAS
from .emfield import SusceptorSpec, solve_field
from .errors import ConvergenceError, DomainError, InfeasibleError, UnreachableTargetError
from .thermo import (
    SPECIES,
    STOICH,
    GasFeed,
    KineticsParams,
    default_table,
    delta_g_rxn,
    delta_h_rxn,
    equilibrium_conversion,
)

log = logging.getLogger(__name__)

DEFAULT_KINETICS = KineticsParams(pre_exponential=4.0e-3, activation_energy=8.0e4)


@dataclass(frozen=True)
class BedSpec:
    void_fraction: float = 0.5
    k_eff_bed: float = 11.0  # W/(m K)
    kinetics: KineticsParams = DEFAULT_KINETICS

    def __post_init__(self):
        if not 0 < self.void_fraction < 1:
            raise DomainError("void_fraction must lie in (0, 1)")
        if self.k_eff_bed <= 0:
            raise DomainError("k_eff_bed must be positive")


@dataclass(frozen=True)
class InsulationSpec:
    thickness: float = 0.025  # m
    k_ins: float = 0.15  # W/(m K)

    def __post_init__(self):
        if self.thickness < 0 or self.k_ins <= 0:
            raise DomainError("insulation thickness must be >= 0 and k_ins > 0")

    def conductance_per_area(self, radius):
        """Shell conductance referred to the inner surface, W/(m^2 K)."""
        if self.thickness == 0:
            return math.inf
        return self.k_ins / (radius * math.log((radius + self.thickness) / radius))


@dataclass(frozen=True)
class ReactorCase:
    susceptor: SusceptorSpec
    coil: CoilSpec
    feed: GasFeed
    bed: BedSpec = BedSpec()
    insulation: InsulationSpec = InsulationSpec()
    ambient_temperature: float = 298.15
    heating_mode: str = "induction"  # or "wall"
    frequency: float = 1e5  # Hz, induction drive frequency

    def __post_init__(self):
        if self.heating_mode not in ("induction", "wall"):
            raise DomainError("heating_mode must be 'induction' or 'wall'")

    def with_flow(self, molar_flow):
        return replace(self, feed=self.feed.with_flow(molar_flow))


@dataclass(frozen=True)
class GhsvSpec:
    ghsv: float  # 1/h
    T_ref: float = 273.15
    P_ref: float = 101325.0

    def __post_init__(self):
        if self.ghsv < 0:
            raise DomainError("ghsv must be non-negative")


def ghsv_to_molar_flow(ghsv: GhsvSpec, bed_volume: float) -> float:
    """Feed molar flow (mol/s) for a space velocity referred to (T_ref, P_ref)."""
    if bed_volume <= 0:
        raise DomainError("bed_volume must be positive")
    q_ref = ghsv.ghsv * bed_volume / 3600.0
    return q_ref * ghsv.P_ref / (R_GAS * ghsv.T_ref)


def molar_flow_to_ghsv(molar_flow, bed_volume, T_ref=273.15, P_ref=101325.0):
    return molar_flow * R_GAS * T_ref / P_ref * 3600.0 / bed_volume


@dataclass
class SimulationResult:
    r_centers: np.ndarray
    z_centers: np.ndarray
    T_field: np.ndarray  # (Nr, Nz) K
    conversion_field: np.ndarray  # (Nr, Nz)
    X_CO2_outlet: float
    T_outlet_max: float
    energy_ledger: dict
    converged: bool
    iterations: int
    residual_history: list = field(default_factory=list)
    equilibrium_field: Optional[np.ndarray] = None
    molar_flow: float = 0.0
    heating_mode: str = "induction"

    @property
    def ledger_imbalance(self):
        e = self.energy_ledger
        return e["P_susceptor_W"] - e["Q_sensible_W"] - e["Q_reaction_W"] - e["Q_insulation_loss_W"]

    def fields_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r_m", "z_m", "T_K", "X_local"])
        for j, r in enumerate(self.r_centers):
            for i, z in enumerate(self.z_centers):
                w.writerow([f"{r:.6g}", f"{z:.6g}", f"{self.T_field[j, i]:.6f}",
                            f"{self.conversion_field[j, i]:.8f}"])
        return buf.getvalue()

    def profiles_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["profile", "position_m", "T_K"])
        for r, t in zip(self.r_centers, self.T_field[:, -1]):
            w.writerow(["outlet_radial", f"{r:.6g}", f"{t:.6f}"])
        for z, t in zip(self.z_centers, self.T_field[0, :]):
            w.writerow(["axis_axial", f"{z:.6g}", f"{t:.6f}"])
        return buf.getvalue()

    def ledger_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["term", "value_W"])
        for k, v in self.energy_ledger.items():
            w.writerow([k, f"{v:.9g}"])
        w.writerow(["imbalance", f"{self.ledger_imbalance:.9g}"])
        return buf.getvalue()


# --------------------------------------------------------------------------
# grid and operators


class _Grid:
    def __init__(self, case: ReactorCase, nr: int, nz: int):
        if nr < 4 or nz < 4:
            raise DomainError("grid too coarse")
        self.nr, self.nz = nr, nz
        R, L = case.susceptor.radius_R, case.susceptor.length_L
        self.R, self.L = R, L
        self.dr, self.dz = R / nr, L / nz
        self.r_faces = np.linspace(0.0, R, nr + 1)
        self.r = 0.5 * (self.r_faces[:-1] + self.r_faces[1:])
        self.z = (np.arange(nz) + 0.5) * self.dz
        self.ring_area = np.pi * np.diff(self.r_faces**2)  # axial face area per ring
        self.volume = np.outer(self.ring_area, np.full(nz, self.dz))
        self.n = nr * nz

    def index(self, j, i):
        return j * self.nz + i


def _conduction_matrix(g: _Grid, k: float, wall_conductance: float):
    """Conduction operator (W/K) with wall loss on the diagonal."""
    rows, cols, vals = [], [], []
    diag = np.zeros(g.n)
    jj, ii = np.meshgrid(np.arange(g.nr), np.arange(g.nz), indexing="ij")
    # radial faces between j and j+1
    jr, ir = jj[:-1].ravel(), ii[:-1].ravel()
    cond_r = k * 2 * np.pi * g.r_faces[jr + 1] * g.dz / g.dr
    a, b = g.index(jr, ir), g.index(jr + 1, ir)
    rows += [a, b]
    cols += [b, a]
    vals += [cond_r, cond_r]
    np.add.at(diag, a, -cond_r)
    np.add.at(diag, b, -cond_r)
    # axial faces between i and i+1
    ja, ia = jj[:, :-1].ravel(), ii[:, :-1].ravel()
    cond_z = k * g.ring_area[ja] / g.dz
    a, b = g.index(ja, ia), g.index(ja, ia + 1)
    rows += [a, b]
    cols += [b, a]
    vals += [cond_z, cond_z]
    np.add.at(diag, a, -cond_z)
    np.add.at(diag, b, -cond_z)
    # outer wall
    wall = g.index(g.nr - 1, np.arange(g.nz))
    wall_area = 2 * np.pi * g.R * g.dz
    diag[wall] -= wall_conductance * wall_area
    rows.append(np.arange(g.n))
    cols.append(np.arange(g.n))
    vals.append(diag)
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(g.n, g.n))
    return A, wall, wall_conductance * wall_area


def _series_wall_conductance(k, dr, shell):
    half_cell = k / (dr / 2)
    if math.isinf(shell):
        return half_cell
    return 1.0 / (1.0 / shell + 1.0 / half_cell)


# --------------------------------------------------------------------------
# electromagnetic source


def em_source_shape(case: ReactorCase, g: _Grid, n_nodes: int = 513):
    """Unit-power source distribution per cell volume, W/m^3 per W."""
    field_ = solve_field(case.susceptor, case.frequency, 1.0, n_nodes)
    r, p = field_.r_grid, field_.p_density
    # ring averages of p from a cumulative integral of p r dr
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] * r[1:] + p[:-1] * r[:-1]) * np.diff(r))])
    at_faces = np.interp(g.r_faces, r, cum)
    ring = 2 * np.pi * np.diff(at_faces) / g.ring_area
    z_mid = g.z - g.L / 2
    # three-point Gauss average of B^2 over each axial cell
    nodes = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)]) * g.dz / 2
    weights = np.array([5, 8, 5]) / 18.0
    b2 = sum(w * biot_savart_bz(case.coil, 1.0, z_mid + x) ** 2 for w, x in zip(weights, nodes))
    shape = np.outer(ring, b2)
    total = float(np.sum(shape * g.volume))
    if total <= 0:
        raise DomainError("electromagnetic source vanishes")
    return shape / total


# --------------------------------------------------------------------------
# chemistry along streamlines


def _keq(T):
    Tc = np.clip(T, 400.0, 1400.0)
    return np.exp(-delta_g_rxn(Tc) / (R_GAS * Tc))


def _rate_coeffs(y0, K):
    """f(x) = a2 x^2 + a1 x + a0 with f the mass-action driving force per P^2."""
    c, h, co, w = y0[:4]
    a2 = c * c * (1 - 1 / K)
    a1 = -c * (c + h) - c * (co + w) / K
    a0 = c * h - co * w / K
    return a2, a1, a0


def _small_root(A, B, C):
    # root continuous in A -> 0 of A x^2 + B x + C = 0, B < 0
    disc = np.sqrt(np.maximum(B * B - 4 * A * C, 0.0))
    return 2 * C / (-B + disc)


def equilibrium_limit(y0, T):
    """Equilibrium CO2 conversion for feed fractions ``y0`` at each temperature."""
    K = _keq(np.asarray(T, dtype=float))
    a2, a1, a0 = _rate_coeffs(y0, K)
    return _small_root(a2, a1, a0)


def march_conversion(T, y0, flux_total, dz, pressure, kinetics: KineticsParams):
    """Cell-exit CO2 conversion on every streamline for a temperature field."""
    c = y0[0]
    nr, nz = T.shape
    X = np.zeros((nr, nz))
    if c <= 0 or flux_total <= 0:
        return X
    K = _keq(T)
    k = kinetics.rate_constant(T)
    a2, a1, a0 = _rate_coeffs(y0, K)
    D = dz * k * pressure**2 / (c * flux_total)
    x_prev = np.zeros(nr)
    for i in range(nz):
        A = D[:, i] * a2[:, i]
        B = D[:, i] * a1[:, i] - 1.0
        C = D[:, i] * a0[:, i] + x_prev
        x = _small_root(A, B, C)
        x_eq = _small_root(a2[:, i], a1[:, i], a0[:, i])
        lo, hi = np.minimum(x_prev, x_eq), np.maximum(x_prev, x_eq)
        x = np.clip(x, lo, hi)
        X[:, i] = x
        x_prev = x
    return X


def _composition(y0, X):
    return y0[:, None, None] + STOICH[:, None, None] * y0[0] * X[None]


# --------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class SolverOptions:
    relaxation: float = 0.7
    tol: float = 1e-6
    max_iter: int = 10000
    em_nodes: int = 513


class _Problem:
    """Assembled state for one case and grid, reusable across source amplitudes."""

    def __init__(self, case: ReactorCase, grid, options: SolverOptions):
        nr, nz = grid
        self.case = case
        self.opt = options
        self.g = _Grid(case, nr, nz)
        g = self.g
        k = case.bed.k_eff_bed
        self.table = default_table()
        if case.heating_mode == "wall":
            self.wall_U = k / (g.dr / 2)
            self.shell_U = case.insulation.conductance_per_area(g.R)
        else:
            shell = case.insulation.conductance_per_area(g.R)
            self.wall_U = _series_wall_conductance(k, g.dr, shell)
        self.A_cond, self.wall_idx, self.wall_coef = _conduction_matrix(g, k, self.wall_U)
        self.flux = case.feed.molar_flow_total / (np.pi * g.R**2)
        self.y0 = case.feed.y
        self._shape = None

    @property
    def shape(self):
        if self._shape is None:
            self._shape = em_source_shape(self.case, self.g, self.opt.em_nodes)
        return self._shape

    def solve(self, power_W: float, T_wall: Optional[float] = None, T_init=None) -> SimulationResult:
        case, g, opt = self.case, self.g, self.opt
        T_in = case.feed.inlet_temperature
        T_amb = case.ambient_temperature
        wall_mode = case.heating_mode == "wall"
        if wall_mode and T_wall is None:
            raise DomainError("wall-heated solve needs T_wall")
        q = np.zeros((g.nr, g.nz)) if wall_mode else power_W * self.shape
        T_sink = T_wall if wall_mode else T_amb

        if T_init is not None:
            T = np.array(T_init, dtype=float)
        else:
            T = np.full((g.nr, g.nz), T_in)
        G = self.flux
        y0 = self.y0
        P = case.feed.pressure
        hist = []
        n_idx = np.arange(g.n)
        up_idx = n_idx.reshape(g.nr, g.nz)[:, :-1].ravel()
        down_idx = n_idx.reshape(g.nr, g.nz)[:, 1:].ravel()
        adv_area = np.repeat(g.ring_area, g.nz).reshape(g.nr, g.nz)
        converged = False
        it = 0
        relax = opt.relaxation
        for it in range(1, opt.max_iter + 1):
            X, cpbar, q_rxn = self._closure(T, T_in)
            adv = G * adv_area * cpbar  # W/K per cell
            A = self.A_cond - sp.diags(adv.ravel()) + sp.csr_matrix(
                (adv[:, 1:].ravel(), (down_idx, up_idx)), shape=(g.n, g.n))
            b = -(q - q_rxn).ravel() * g.volume.ravel()
            b[self.wall_idx] -= self.wall_coef * T_sink
            inlet = n_idx.reshape(g.nr, g.nz)[:, 0]
            b[inlet] -= adv[:, 0] * T_in
            T_new = splu(A.tocsc()).solve(b).reshape(g.nr, g.nz)
            change = float(np.max(np.abs(T_new - T) / T))
            hist.append(change)
            if not np.all(np.isfinite(T_new)):
                raise ConvergenceError("temperature field diverged", change, hist)
            if change < opt.tol:
                T = T_new
                converged = True
                break
            # back off when the iteration stalls in a cycle
            if it > 40 and it % 20 == 0 and hist[-1] > 0.5 * hist[-21]:
                relax = max(0.5 * relax, 0.05)
            T = T + relax * (T_new - T)
        if not converged:
            raise ConvergenceError(
                f"reactor solve did not converge in {opt.max_iter} iterations "
                f"(last change {hist[-1]:.2e})", hist[-1], hist)

        # ledger from the operator used in the last linear solve
        T_up = np.concatenate([np.full((g.nr, 1), T_in), T[:, :-1]], axis=1)
        Q_sens = float(np.sum(adv * (T - T_up)))
        Q_rxn = float(np.sum(q_rxn * g.volume))
        wall_flux = float(np.sum(self.wall_coef * (T[-1, :] - T_sink)))
        if wall_mode:
            shell_loss = (self.shell_U * 2 * np.pi * g.R * g.L * (T_wall - T_amb)
                          if np.isfinite(self.shell_U) else 0.0)
            ledger = {
                "P_susceptor_W": -wall_flux + shell_loss,
                "Q_sensible_W": Q_sens,
                "Q_reaction_W": Q_rxn,
                "Q_insulation_loss_W": shell_loss,
            }
        else:
            ledger = {
                "P_susceptor_W": float(np.sum(q * g.volume)),
                "Q_sensible_W": Q_sens,
                "Q_reaction_W": Q_rxn,
                "Q_insulation_loss_W": wall_flux,
            }
        X_final = march_conversion(T, y0, G, g.dz, P, case.bed.kinetics)
        X_out = float(np.sum(X_final[:, -1] * g.ring_area) / np.sum(g.ring_area))
        return SimulationResult(
            r_centers=g.r.copy(),
            z_centers=g.z.copy(),
            T_field=T,
            conversion_field=X_final,
            X_CO2_outlet=X_out,
            T_outlet_max=float(np.max(T[:, -1])),
            energy_ledger=ledger,
            converged=converged,
            iterations=it,
            residual_history=hist,
            equilibrium_field=equilibrium_limit(y0, T),
            molar_flow=case.feed.molar_flow_total,
            heating_mode=case.heating_mode,
        )

    def _closure(self, T, T_in):
        """Conversion, secant heat capacity and reaction sink for a temperature field."""
        g = self.g
        y0 = self.y0
        X = march_conversion(T, y0, self.flux, g.dz, self.case.feed.pressure, self.case.bed.kinetics)
        n = _composition(y0, X)
        T_up = np.concatenate([np.full((g.nr, 1), T_in), T[:, :-1]], axis=1)
        Tc, Tu = np.clip(T, 250.0, 1400.0), np.clip(T_up, 250.0, 1400.0)
        dT = Tc - Tu
        small = np.abs(dT) < 1e-6
        h_hi = self.table.h_vector(Tc)
        h_lo = self.table.h_vector(Tu)
        cp_sec = np.sum(n * (h_hi - h_lo), axis=0) / np.where(small, 1.0, dT)
        cp_loc = np.sum(n * self.table.cp_vector(0.5 * (Tc + Tu)), axis=0)
        cpbar = np.where(small, cp_loc, cp_sec)
        X_up = np.concatenate([np.zeros((g.nr, 1)), X[:, :-1]], axis=1)
        extent = y0[0] * self.flux * (X - X_up) / g.dz  # mol/(s m^3)
        q_rxn = extent * delta_h_rxn(Tc)
        return X, cpbar, q_rxn


def solve_steady(case: ReactorCase, drive: DrivePoint, grid=(64, 128),
                 options: SolverOptions = SolverOptions(), **kw) -> SimulationResult:
    """Solve the coupled heat/reaction problem at a fixed coil drive."""
    nr, nz = grid
    if nr < 32 or nz < 64:
        raise DomainError("grid must be at least 32 x 64")
    if case.heating_mode != "induction":
        raise DomainError("use wall_heated_solve for wall heating")
    case = replace(case, frequency=drive.frequency_f)
    prob = _Problem(case, grid, options)
    R_s = susceptor_resistance(case.susceptor, case.coil, drive.frequency_f)
    return prob.solve(drive.rms_current_I**2 * R_s, **kw)


def wall_heated_solve(case: ReactorCase, T_wall: float, grid=(64, 128),
                      options: SolverOptions = SolverOptions(), **kw) -> SimulationResult:
    """Same bed and flow, heated through a wall held at ``T_wall``."""
    if case.heating_mode != "wall":
        raise DomainError("case.heating_mode must be 'wall'")
    prob = _Problem(case, grid, options)
    return prob.solve(0.0, T_wall=T_wall, **kw)


# --------------------------------------------------------------------------
# control loops


@dataclass
class ControlResult:
    drive: Optional[DrivePoint]
    result: SimulationResult
    power_W: float
    evaluations: int


def power_control(case: ReactorCase, target_T_max_outlet: float, grid=(64, 128),
                  options: SolverOptions = SolverOptions(), *, tol_K: float = 0.05,
                  max_power_W: float = math.inf, max_evals: int = 40,
                  _problem: Optional[_Problem] = None, _T_init=None) -> ControlResult:
    """Coil power (and current) giving the requested maximum outlet temperature.

    Secant steps on source power, safeguarded by a bracket once one exists.
    """
    if case.heating_mode == "wall":
        res = wall_heated_solve(case, target_T_max_outlet, grid, options, T_init=_T_init)
        return ControlResult(None, res, res.energy_ledger["P_susceptor_W"], 1)
    T_floor = max(case.feed.inlet_temperature, case.ambient_temperature)
    if target_T_max_outlet <= T_floor:
        raise DomainError("target temperature must exceed inlet and ambient temperatures")
    if not operable_region(0, case.frequency, case.coil):
        raise UnreachableTargetError("drive frequency is above the coil self-resonance")
    prob = _problem or _Problem(case, grid, options)
    R_s = susceptor_resistance(case.susceptor, case.coil, case.frequency)

    # first guess: sensible duty to the target plus shell loss at the target
    tab = default_table()
    dh = sum(case.feed.species_flows[s] * (tab.h(n, target_T_max_outlet) - tab.h(n, case.feed.inlet_temperature))
             for s, n in enumerate(SPECIES))
    shell = case.insulation.conductance_per_area(case.susceptor.radius_R)
    shell = shell if math.isfinite(shell) else 1e3
    loss = shell * 2 * np.pi * case.susceptor.radius_R * case.susceptor.length_L * (target_T_max_outlet - case.ambient_temperature)
    p = max(float(dh) + 0.5 * loss, 1e-6)

    T_init = _T_init
    lo = hi = None  # (power, error)
    history = []
    best = None
    for n_eval in range(1, max_evals + 1):
        if p > max_power_W:
            raise UnreachableTargetError(f"required power exceeds cap {max_power_W:g} W")
        res = prob.solve(p, T_init=T_init)
        T_init = res.T_field
        err = res.T_outlet_max - target_T_max_outlet
        history.append((p, err))
        if best is None or abs(err) < abs(best[1]):
            best = (p, err, res)
        if abs(err) <= tol_K:
            break
        if err < 0:
            lo = (p, err) if lo is None or p > lo[0] else lo
        else:
            hi = (p, err) if hi is None or p < hi[0] else hi
        if len(history) >= 2:
            (p0, e0), (p1, e1) = history[-2], history[-1]
            p_new = p1 - e1 * (p1 - p0) / (e1 - e0) if e1 != e0 else p1 * 1.5
        else:
            # temperature rise is roughly proportional to power
            rise = res.T_outlet_max - T_floor
            p_new = p * (target_T_max_outlet - T_floor) / max(rise, 1e-3)
        if lo is not None and hi is not None and not (lo[0] < p_new < hi[0]):
            p_new = 0.5 * (lo[0] + hi[0])
        if p_new <= 0:
            p_new = 0.5 * p
        p = p_new
    else:
        raise ConvergenceError(
            f"power control missed target by {best[1]:.3g} K after {max_evals} solves",
            best[1], [e for _, e in history])
    current = math.sqrt(p / R_s)
    return ControlResult(DrivePoint(case.frequency, current), res, p, n_eval)


@dataclass
class GhsvResult:
    ghsv: float
    result: SimulationResult
    power_W: float
    drive: Optional[DrivePoint]
    history: list


def _run_at_ghsv(case, ghsv, target_T_max, grid, options, ref: GhsvSpec, T_init=None):
    flow = ghsv_to_molar_flow(replace(ref, ghsv=ghsv), case.susceptor.volume)
    c = case.with_flow(flow)
    ctl = power_control(c, target_T_max, grid, options, _T_init=T_init)
    return ctl


def find_ghsv_for_conversion(case: ReactorCase, target_X: float = 0.5,
                             target_T_max: float = 823.15, grid=(64, 128),
                             options: SolverOptions = SolverOptions(), *,
                             ref: GhsvSpec = GhsvSpec(1.0), x_tol: float = 0.002,
                             ghsv_guess: float = 200.0, max_evals: int = 40) -> GhsvResult:
    """Space velocity at which the flow-averaged outlet conversion hits ``target_X``."""
    x_eq = equilibrium_conversion(case.feed, target_T_max)
    if target_X >= x_eq:
        raise InfeasibleError(
            f"target conversion {target_X:.3f} is not below equilibrium {x_eq:.3f} at {target_T_max:.1f} K")
    history = []
    cache_T = {}

    def evaluate(gh):
        T0 = cache_T.get("last")
        if T0 is not None and T0.shape != tuple(grid):
            T0 = None
        ctl = _run_at_ghsv(case, gh, target_T_max, grid, options, ref, T0)
        cache_T["last"] = ctl.result.T_field
        history.append((gh, ctl.result.X_CO2_outlet))
        log.debug("GHSV %.4g 1/h -> X %.4f", gh, ctl.result.X_CO2_outlet)
        return ctl

    lo = hi = None  # lo: conversion above target; hi: below
    gh = ghsv_guess
    ctl = evaluate(gh)
    for _ in range(max_evals):
        x = ctl.result.X_CO2_outlet
        if abs(x - target_X) <= x_tol:
            return GhsvResult(gh, ctl.result, ctl.power_W, ctl.drive, history)
        if x > target_X:
            lo = (gh, x, ctl)
        else:
            hi = (gh, x, ctl)
        if lo is None:
            gh = gh / 3.0
            if gh < 1e-3:
                raise InfeasibleError("target conversion unreachable even at vanishing GHSV")
        elif hi is None:
            gh = gh * 3.0
        else:
            if hi[0] / lo[0] - 1 < 1e-4:
                best = min((lo, hi), key=lambda t: abs(t[1] - target_X))
                return GhsvResult(best[0], best[2].result, best[2].power_W, best[2].drive, history)
            # interpolate in log GHSV, guarded toward the bracket middle
            a, b = math.log(lo[0]), math.log(hi[0])
            t = (lo[1] - target_X) / (lo[1] - hi[1])
            t = min(max(t, 0.1), 0.9)
            gh = math.exp(a + t * (b - a))
        ctl = evaluate(gh)
    raise ConvergenceError("GHSV search did not converge", None, [x for _, x in history])
