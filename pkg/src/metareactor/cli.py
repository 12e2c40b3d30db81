"""metareactor command line.

    metareactor [--config FILE] [--out DIR] [--workers N] [--dry-run] COMMAND ...

Commands: impedance, contour, simulate, sweep, srf, fit. Exit codes: 0 ok,
2 configuration error, 3 solver non-convergence, 4 infeasible target.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import CoilSpec, circuit_report, coil_srf, find_f_ideal, operable_region
from .config import RunConfig, load_config, require
from .effmed import ImpedanceSample, PowerLaw, Uniform, fit_sigma_from_impedance, sigma_for_delta_ratio
from .emfield import SusceptorSpec
from .errors import ConfigError, ConvergenceError, DomainError, MetareactorError
from .reactorsim import (
    BedSpec,
    GhsvSpec,
    InsulationSpec,
    ReactorCase,
    SolverOptions,
    ghsv_to_molar_flow,
    power_control,
)
from .scaleup import SweepConfig, lab_geometry, scale_geometry, sweep
from .svg import PlotSpec, Series, heatmap, line_plot
from .thermo import GasFeed, KineticsParams

log = logging.getLogger("metareactor")


# --------------------------------------------------------------------------
# config -> model objects


def _profile(cfg: RunConfig):
    sigma = float(require(cfg, "susceptor", "sigma_eff_s_per_m"))
    prof = cfg.section("susceptor.profile")
    kind = prof.get("kind", "uniform")
    if kind == "uniform":
        return Uniform(sigma)
    if kind == "power_law":
        return PowerLaw(sigma, float(prof.get("p", 2.0)), float(prof.get("A", 1.0)),
                        float(prof.get("core_fraction", 0.2)))
    raise ConfigError(f"{cfg.source}: [susceptor.profile] kind must be 'uniform' or 'power_law', got {kind!r}")


def build_susceptor_and_coil(cfg: RunConfig):
    series = cfg.get("susceptor", "series", "explicit")
    profile = _profile(cfg)
    if series in ("lab", "scale"):
        beta = float(require(cfg, "susceptor", "beta"))
        geom = (lab_geometry if series == "lab" else scale_geometry)(beta)
        sus = geom.susceptor.with_profile(profile)
        coil = geom.coil
    elif series == "explicit":
        sus = SusceptorSpec(float(require(cfg, "susceptor", "radius_m")),
                            float(require(cfg, "susceptor", "length_m")), profile)
        coil = None
    else:
        raise ConfigError(f"{cfg.source}: [susceptor] series must be 'lab', 'scale' or 'explicit'")
    c = cfg.section("coil")
    keys = {"turns": "turns_N", "coil_radius_m": "coil_radius_Rc", "half_length_m": "half_length_Lc",
            "conductor_radius_m": "conductor_radius_ac", "pitch_m": "pitch_p",
            "wire_diameter_m": "wire_diameter_d", "conductivity_s_per_m": "conductor_conductivity"}
    given = {keys[k]: v for k, v in c.items() if k in keys}
    if coil is None:
        for k in ("turns", "coil_radius_m", "half_length_m", "conductor_radius_m", "pitch_m"):
            require(cfg, "coil", k)
        coil = CoilSpec(**given)
    elif given:
        if "conductor_radius_ac" in given and "wire_diameter_d" not in given:
            given["wire_diameter_d"] = 2 * given["conductor_radius_ac"]
        coil = replace(coil, **given)
    return sus, coil


def build_case(cfg: RunConfig) -> ReactorCase:
    sus, coil = build_susceptor_and_coil(cfg)
    f = cfg.section("feed")
    feed = GasFeed.h2_co2(float(f.get("h2_co2_ratio", 2.983)),
                          inlet_temperature=float(f.get("inlet_temperature_k", 298.15)),
                          pressure=float(f.get("pressure_pa", 101325.0)))
    ghsv = float(require(cfg, "feed", "ghsv_per_h"))
    feed = feed.with_flow(ghsv_to_molar_flow(GhsvSpec(ghsv), sus.volume))
    b = cfg.section("bed")
    kin = KineticsParams(float(b.get("pre_exponential_mol_per_s_m3_pa2", 4e-3)),
                         float(b.get("activation_energy_j_per_mol", 8e4)),
                         float(b.get("activation_floor_k", 703.15)),
                         float(b.get("activation_ramp_k", 10.0)))
    bed = BedSpec(float(b.get("void_fraction", 0.5)), float(b.get("k_eff_w_per_m_k", 11.0)), kin)
    ins = cfg.section("insulation")
    insulation = InsulationSpec(float(ins.get("thickness_m", 0.025)), float(ins.get("k_ins_w_per_m_k", 0.15)))
    return ReactorCase(sus, coil, feed, bed, insulation,
                       ambient_temperature=float(ins.get("ambient_temperature_k", 298.15)),
                       heating_mode=b.get("heating_mode", "induction"),
                       frequency=float(require(cfg, "coil", "frequency_hz")))


def solver_options(cfg: RunConfig) -> SolverOptions:
    n = cfg.section("numerics")
    return SolverOptions(relaxation=float(n.get("relaxation", 0.7)), tol=float(n.get("tolerance", 1e-6)),
                         max_iter=int(n.get("max_iterations", 10000)), em_nodes=int(n.get("em_nodes", 513)))


def grid_of(cfg: RunConfig):
    return int(cfg.get("numerics", "grid_nr", 64)), int(cfg.get("numerics", "grid_nz", 128))


# --------------------------------------------------------------------------
# output helpers


def _header(cfg: RunConfig):
    return f"# config={cfg.digest()} version={__version__}\n"


def write_csv(path: Path, cfg: RunConfig, header, rows):
    buf = io.StringIO()
    buf.write(_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.9g}" if isinstance(v, float) else v for v in r])
    path.write_text(buf.getvalue())
    return path


def _write_text_csv(path: Path, cfg, body: str):
    path.write_text(_header(cfg) + body)


# --------------------------------------------------------------------------
# commands


def cmd_impedance(args, cfg):
    sus, coil = build_susceptor_and_coil(cfg)
    sw = cfg.section("sweep")
    f_min = args.f_min or float(sw.get("f_min_hz", 1e3))
    f_max = args.f_max or float(sw.get("f_max_hz", 1e8))
    n = args.n_points or int(sw.get("n_frequencies", 61))
    if n < 1 or f_min <= 0 or f_max < f_min:
        raise DomainError("need n_points >= 1 and 0 < f_min <= f_max")
    freqs = np.geomspace(f_min, f_max, n) if n > 1 else np.array([f_min])
    rows = []
    for f in freqs:
        rep = circuit_report(sus, coil, float(f))
        rows.append((float(f), rep.R_susc, rep.R_coil, rep.eta_coupling))
    out = args.out
    write_csv(out / "impedance.csv", cfg, ["frequency_hz", "R_susc_ohm", "R_coil_ohm", "eta_coupling"], rows)
    f_ideal = find_f_ideal(sus) if isinstance(sus.profile, Uniform) else None
    if f_ideal:
        print(f"f_ideal = {f_ideal:.6g} Hz")
    if n > 1:
        spec = PlotSpec("impedance_curve", "Susceptor and coil resistance", "frequency (Hz)", "resistance (ohm)",
                        xlog=True, ylog=True,
                        series=[Series("R_susc", freqs, [r[1] for r in rows]),
                                Series("R_coil", freqs, [r[2] for r in rows], dashed=True)],
                        vlines=[(f_ideal, "f_ideal")] if f_ideal else [])
        (out / "impedance.svg").write_text(line_plot(spec))
    print(f"wrote {len(rows)} rows to {out / 'impedance.csv'}")
    return 0


def cmd_contour(args, cfg):
    sw = cfg.section("sweep")
    b0, b1 = float(sw.get("beta_min", 1.0)), float(sw.get("beta_max", 32.0))
    nb = int(sw.get("n_betas", 32))
    f0, f1 = float(sw.get("f_min_hz", 1e3)), float(sw.get("f_max_hz", 1e8))
    nf = int(sw.get("n_frequencies", 61))
    if not (0 < b0 <= b1 and 0 < f0 <= f1 and nb >= 1 and nf >= 1):
        raise DomainError("contour ranges must be positive and ascending")
    betas = np.geomspace(b0, b1, nb) if nb > 1 else np.array([b0])
    freqs = np.geomspace(f0, f1, nf) if nf > 1 else np.array([f0])
    eta = np.full((nb, nf), np.nan)
    mask = np.zeros((nb, nf), dtype=bool)
    rows = []
    for j, b in enumerate(betas):
        geom = scale_geometry(float(b))
        R = geom.susceptor.radius_R
        srf = coil_srf(geom.coil).f_res
        for i, f in enumerate(freqs):
            sigma = sigma_for_delta_ratio(R, float(f), 0.5)
            e = circuit_report(geom.susceptor.with_profile(Uniform(sigma)), geom.coil, float(f)).eta_coupling
            eta[j, i] = e
            mask[j, i] = f >= srf
            rows.append((float(b), float(f), sigma, e, int(mask[j, i])))
    write_csv(args.out / "contour.csv", cfg, ["beta", "frequency_hz", "sigma_eff_s_per_m", "eta_coupling", "above_srf"], rows)
    (args.out / "contour.svg").write_text(heatmap(freqs, betas, eta, mask, title="Coupling efficiency on the delta = R/2 line",
                                                 xlabel="frequency (Hz)", ylabel="beta"))
    print(f"wrote {len(rows)} cells to {args.out / 'contour.csv'}")
    return 0


def cmd_simulate(args, cfg):
    case = build_case(cfg)
    grid = grid_of(cfg)
    target = float(cfg.get("feed", "target_t_max_k", 823.15))
    if args.dry_run:
        print(cfg.text.rstrip())
        print(f"# grid {grid[0]} x {grid[1]} (r x z), dr = {case.susceptor.radius_R / grid[0]:.4g} m, "
              f"dz = {case.susceptor.length_L / grid[1]:.4g} m")
        print(f"# molar flow {case.feed.molar_flow_total:.6g} mol/s, mode {case.heating_mode}")
        return 0
    ctl = power_control(case, target, grid, solver_options(cfg))
    res = ctl.result
    out = args.out
    _write_text_csv(out / "fields.csv", cfg, res.fields_csv())
    _write_text_csv(out / "profiles.csv", cfg, res.profiles_csv())
    _write_text_csv(out / "ledger.csv", cfg, res.ledger_csv())
    (out / "radial_temperature.svg").write_text(line_plot(PlotSpec(
        "radial_temperature", "Outlet radial temperature", "r (m)", "T (K)",
        series=[Series("outlet", res.r_centers, res.T_field[:, -1])])))
    (out / "axial_temperature.svg").write_text(line_plot(PlotSpec(
        "axial_temperature", "Axis temperature", "z (m)", "T (K)",
        series=[Series("axis", res.z_centers, res.T_field[0, :])])))
    cur = f"{ctl.drive.rms_current_I:.4g} A" if ctl.drive else "n/a"
    print(f"X_CO2 = {res.X_CO2_outlet:.4f}  T_outlet_max = {res.T_outlet_max:.2f} K  "
          f"P = {ctl.power_W:.4g} W  I_rms = {cur}  iterations = {res.iterations}")
    return 0


def _sweep_config(cfg, args):
    sw = cfg.section("sweep")
    kw = {}
    if "betas" in sw:
        kw["betas"] = tuple(float(b) for b in sw["betas"])
    if "reactor_types" in sw:
        kw["reactor_types"] = tuple(sw["reactor_types"])
    if "target_conversion" in sw:
        kw["target_X"] = float(sw["target_conversion"])
    if "target_t_max_k" in sw:
        kw["T_max"] = float(sw["target_t_max_k"])
    if "eta_power_electronics" in sw:
        kw["eta_pe"] = float(sw["eta_power_electronics"])
    if "ghsv_ref_per_h" in sw:
        kw["ghsv_ref"] = float(sw["ghsv_ref_per_h"])
    return SweepConfig(grid=grid_of(cfg), **kw)


def cmd_sweep(args, cfg):
    sc = _sweep_config(cfg, args)
    workers = args.workers or int(cfg.get("sweep", "workers", 1))
    if args.dry_run:
        print(f"# {len(sc.betas) * len(sc.reactor_types)} rows, config hash {sc.digest()}, workers {workers}")
        return 0
    rows = sweep(sc, args.out / "sweep.csv", workers=workers)
    series_g, series_e = [], []
    for t in sc.reactor_types:
        sel = [r for r in rows if r["reactor_type"] == t and not r["error"]]
        bx = [float(r["beta"]) for r in sel]
        series_g.append(Series(t, bx, [float(r["ghsv_per_h"]) for r in sel]))
        series_e.append(Series(t, bx, [float(r["eta_total"]) for r in sel]))
    lim = [r for r in rows if r["reactor_type"] == sc.reactor_types[0] and r["eta_plugflow_limit"] != ""]
    series_e.append(Series("plug-flow limit", [float(r["beta"]) for r in lim],
                           [float(r["eta_plugflow_limit"]) for r in lim], dashed=True))
    (args.out / "ghsv_vs_beta.svg").write_text(line_plot(PlotSpec(
        "ghsv_vs_beta", "GHSV for 50 % conversion", "beta", "GHSV (1/h)", ylog=True, series=series_g)))
    (args.out / "efficiency_vs_beta.svg").write_text(line_plot(PlotSpec(
        "efficiency_vs_beta", "Total efficiency", "beta", "eta_total", series=series_e)))
    bad = [r for r in rows if r["error"]]
    print(f"wrote {len(rows)} rows to {args.out / 'sweep.csv'} ({len(bad)} with errors)")
    return 0


def cmd_srf(args, cfg):
    _, coil = build_susceptor_and_coil(cfg)
    try:
        rep = coil_srf(coil)
    except DomainError as exc:
        raise DomainError(f"{exc}. Remedy: raise [coil] pitch_m or lower wire_diameter_m") from exc
    print(f"L = {rep.L_henry * 1e6:.6g} uH")
    print(f"C = {rep.C_farad * 1e12:.6g} pF")
    print(f"f_res = {rep.f_res:.6g} Hz")
    for f in cfg.get("coil", "check_frequencies_hz", [float(require(cfg, "coil", "frequency_hz"))]):
        verdict = "operable" if operable_region(0, float(f), coil) else "NOT operable (above SRF)"
        print(f"  {float(f):.6g} Hz: {verdict}")
    return 0


def cmd_fit(args, cfg):
    rel = require(cfg, "fit", "impedance_csv")
    path = Path(rel)
    if not path.is_absolute():
        path = cfg.base_dir / path
    try:
        with path.open() as fh:
            reader = csv.DictReader(line for line in fh if not line.startswith("#"))
            samples = [ImpedanceSample(float(r["frequency_hz"]), float(r["resistance_ohm"])) for r in reader]
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read impedance data {path}: {exc}") from exc
    sus, coil = build_susceptor_and_coil(cfg)
    fit = fit_sigma_from_impedance(samples, sus, coil, max_residual=float(cfg.get("fit", "max_residual", 0.15)))
    write_csv(args.out / "fit.csv", cfg, ["sigma_eff_s_per_m", "rms_log_residual", "n_samples"],
              [(fit.sigma_eff, fit.residual, fit.n_samples)])
    print(f"sigma_eff = {fit.sigma_eff:.6g} S/m  (rms log residual {fit.residual:.3g}, {fit.n_samples} samples)")
    return 0


COMMANDS = {"impedance": cmd_impedance, "contour": cmd_contour, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "srf": cmd_srf, "fit": cmd_fit}


def build_parser():
    p = argparse.ArgumentParser(prog="metareactor", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="TOML run configuration (default: packaged lab config)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=None, help="sweep worker processes")
    p.add_argument("--dry-run", action="store_true", help="validate and echo, do not solve")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    imp = sub.add_parser("impedance", help="R_susc, R_coil and coupling versus frequency")
    imp.add_argument("--f-min", type=float)
    imp.add_argument("--f-max", type=float)
    imp.add_argument("--n-points", type=int)
    sub.add_parser("contour", help="coupling efficiency over (beta, f) on the delta = R/2 line")
    sub.add_parser("simulate", help="power-controlled reactor solve")
    sub.add_parser("sweep", help="GHSV and efficiency sweep over beta and reactor type")
    sub.add_parser("srf", help="coil self-resonance report")
    sub.add_parser("fit", help="effective conductivity from an impedance CSV")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.out = Path(args.out)
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.history:
            tail = ", ".join(f"{h:.3g}" for h in exc.history[-5:])
            print(f"  residual history (last 5): {tail}", file=sys.stderr)
        return exc.exit_code
    except MetareactorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
