import math

import numpy as np
import pytest

from metareactor.circuit import CircuitReport
from metareactor.effmed import skin_depth
from metareactor.errors import InfeasibleError
from metareactor.reactorsim import SimulationResult
from metareactor.scaleup import (
    SWEEP_COLUMNS,
    SweepConfig,
    design_point_on_contour,
    lab_geometry,
    optimize_tailoring_A,
    plugflow_limit_efficiency,
    run_row,
    scale_geometry,
    sweep,
    tailoring_tradeoff,
    total_efficiency,
)


def fake_result(P, Qs, Qr, Ql):
    return SimulationResult(np.zeros(1), np.zeros(1), np.zeros((1, 1)), np.zeros((1, 1)), 0.0, 0.0,
                            {"P_susceptor_W": P, "Q_sensible_W": Qs, "Q_reaction_W": Qr,
                             "Q_insulation_loss_W": Ql}, True, 1)


@pytest.mark.parametrize("beta,D", [(4, 0.075), (32, 0.6)])
def test_geometry_anchors(beta, D):
    g = scale_geometry(beta)
    assert 2 * g.susceptor.radius_R == pytest.approx(D)
    assert g.susceptor.length_L == pytest.approx(D * 150 / 38)
    assert g.coil.turns_N == 7


def test_geometry_scaling_rule():
    a, b = scale_geometry(8), scale_geometry(16)
    assert b.susceptor.radius_R == pytest.approx(2 * a.susceptor.radius_R)
    assert b.susceptor.length_L == pytest.approx(2 * a.susceptor.length_L)
    assert b.coil.pitch_p == pytest.approx(2 * a.coil.pitch_p)
    assert b.coil.wire_diameter_d == pytest.approx(math.sqrt(2) * a.coil.wire_diameter_d)


def test_lab_series_dimensions():
    g = lab_geometry(1)
    assert g.susceptor.radius_R == pytest.approx(0.019)
    assert g.susceptor.length_L == pytest.approx(0.150)


@pytest.mark.parametrize("beta,f,sigma", [(32, 1e5, 113.4), (4, 3e6, 240.4)])
def test_design_point_matches_table(beta, f, sigma):
    p = design_point_on_contour(beta, 0.95)
    assert p.frequency == pytest.approx(f, rel=0.15)
    assert p.sigma_eff_uniform == pytest.approx(sigma, rel=0.15)
    assert p.eta_coupling_uniform == pytest.approx(0.95, abs=1e-9)
    assert 0.45 <= skin_depth(p.sigma_eff_uniform, p.frequency) / (p.susceptor_diameter / 2) <= 0.55


def test_design_frequency_monotone_in_target():
    f = [design_point_on_contour(16, e).frequency for e in (0.7, 0.8, 0.9, 0.95)]
    assert all(a < b for a, b in zip(f, f[1:]))


def test_contour_sigma_scales_inverse_square_at_fixed_f():
    # on the delta = R/2 line sigma ~ 1/R^2
    R1, R2 = scale_geometry(4).susceptor.radius_R, scale_geometry(8).susceptor.radius_R
    from metareactor.effmed import sigma_for_delta_ratio

    assert sigma_for_delta_ratio(R1, 1e6, 0.5) / sigma_for_delta_ratio(R2, 1e6, 0.5) == pytest.approx(4.0)


def test_design_point_infeasible_when_contour_missing():
    with pytest.raises(InfeasibleError):
        design_point_on_contour(32, 0.999999)


def test_tailoring_at_largest_scale():
    p = design_point_on_contour(32)
    res = optimize_tailoring_A(32, p.frequency, 0.93, sigma=p.sigma_eff_uniform)
    assert 7.2 / 2 <= res.A <= 7.2 * 2
    assert res.eta == pytest.approx(0.93, abs=2e-3)


def test_tailoring_tradeoff_monotone():
    p = design_point_on_contour(32)
    # past the coupling peak, flatter heating costs coupling
    rows = [tailoring_tradeoff(32, p.frequency, p.sigma_eff_uniform, A) for A in (3.0, 10.0, 30.0, 100.0)]
    etas, cvs = zip(*rows)
    assert all(a > b for a, b in zip(etas, etas[1:]))
    assert all(a > b for a, b in zip(cvs, cvs[1:]))


def test_tailoring_infeasible_floor():
    p = design_point_on_contour(32)
    with pytest.raises(InfeasibleError):
        optimize_tailoring_A(32, p.frequency, 0.99, sigma=p.sigma_eff_uniform, n_grid=9)


def test_total_efficiency_lossless_limit():
    rep = total_efficiency(fake_result(100.0, 70.0, 30.0, 0.0), CircuitReport(1.0, 0.0, 1.0), 1.0)
    assert rep.eta_total == pytest.approx(1.0)


def test_total_efficiency_bounded_by_drive_chain():
    rep = total_efficiency(fake_result(100.0, 50.0, 20.0, 30.0), CircuitReport(19.0, 1.0, 0.95), 0.95)
    assert rep.eta_total <= 0.95 * 0.95
    assert rep.P_coil_loss_W == pytest.approx(100 * 0.05 / 0.95)
    assert rep.P_electrical_in_W == pytest.approx((100 + rep.P_coil_loss_W) / 0.95)
    assert rep.eta_total == pytest.approx(70.0 / rep.P_electrical_in_W)


def test_plugflow_limit_approaches_cap():
    etas = [plugflow_limit_efficiency(b, 2000.0) for b in (4, 8, 16, 32, 256)]
    assert all(a < b for a, b in zip(etas, etas[1:]))
    assert etas[-1] == pytest.approx(0.9025, abs=0.01)
    assert max(etas) <= 0.9025


def test_sweep_row_error_captured():
    cfg = SweepConfig(betas=(32,), reactor_types=("uniform",), target_X=0.9, grid=(32, 64))
    row = run_row(32, "uniform", cfg)
    assert row["error"].startswith("InfeasibleError")


@pytest.mark.slow
def test_sweep_resume_and_composition(tmp_path):
    cfg = SweepConfig(betas=(4,), reactor_types=("wall", "uniform"), grid=(32, 64), ghsv_ref=2000.0)
    out = tmp_path / "sweep.csv"
    rows = sweep(cfg, out)
    assert len(rows) == 2 and not any(r["error"] for r in rows)
    text = out.read_text()
    assert text.startswith(f"# config={cfg.digest()}")
    header = text.splitlines()[1].split(",")
    assert header == SWEEP_COLUMNS
    # drop one row and resume: only the missing row is recomputed
    lines = text.splitlines()
    out.write_text("\n".join(lines[:-1]) + "\n")
    again = sweep(cfg, out)
    assert out.read_text() == text
    single = run_row(4, "uniform", cfg, 2000.0)
    assert float(single["ghsv_per_h"]) == pytest.approx(float(again[1]["ghsv_per_h"]), rel=1e-9)
