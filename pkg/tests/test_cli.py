import csv

import pytest

from metareactor import __version__
from metareactor.cli import main
from metareactor.config import load_config


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0], list(csv.DictReader(lines[1:]))


def write_cfg(tmp_path, text):
    p = tmp_path / "run.toml"
    p.write_text(text)
    return str(p)


def lab_cfg(tmp_path, replace=(), extra=""):
    text = load_config().text
    for old, new in replace:
        assert old in text
        text = text.replace(old, new)
    return write_cfg(tmp_path, text + extra)


def test_impedance_writes_header_and_rows(tmp_path, capsys):
    rc = main(["--out", str(tmp_path), "impedance", "--f-min", "1e5", "--f-max", "1e7", "--n-points", "5"])
    assert rc == 0
    header, rows = read_rows(tmp_path / "impedance.csv")
    assert header == f"# config={load_config().digest()} version={__version__}"
    assert len(rows) == 5
    assert all(0 < float(r["eta_coupling"]) < 1 for r in rows)
    assert (tmp_path / "impedance.svg").read_text().startswith("<svg")
    assert "f_ideal" in capsys.readouterr().out


def test_impedance_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        main(["--out", str(d), "impedance", "--n-points", "4"])
    assert (a / "impedance.csv").read_bytes() == (b / "impedance.csv").read_bytes()


def test_impedance_bad_range_exit_code(tmp_path):
    assert main(["--out", str(tmp_path), "impedance", "--f-min", "1e7", "--f-max", "1e5"]) == 2


def test_srf_report(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "srf"]) == 0
    out = capsys.readouterr().out
    assert "f_res" in out and "operable" in out


def test_unknown_key_reports_line(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "[susceptor]\nradius = 0.019\n")
    assert main(["--config", cfg, "--out", str(tmp_path), "srf"]) == 2
    err = capsys.readouterr().err
    assert "run.toml:2:" in err and "radius_m" in err


def test_wrong_type_rejected(tmp_path):
    cfg = write_cfg(tmp_path, "[coil]\nturns = \"seven\"\n")
    assert main(["--config", cfg, "--out", str(tmp_path), "srf"]) == 2


def test_missing_config_file(tmp_path):
    assert main(["--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path), "srf"]) == 2


def test_simulate_dry_run_echoes_grid(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "--dry-run", "simulate"]) == 0
    out = capsys.readouterr().out
    assert "# grid 64 x 128" in out
    assert not (tmp_path / "fields.csv").exists()


def test_sweep_dry_run(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "--dry-run", "sweep"]) == 0
    assert "21 rows" in capsys.readouterr().out


def test_contour_small(tmp_path):
    cfg = write_cfg(tmp_path, "[sweep]\nbeta_min = 4.0\nbeta_max = 32.0\nn_betas = 3\n"
                              "f_min_hz = 1e4\nf_max_hz = 1e7\nn_frequencies = 4\n")
    assert main(["--config", cfg, "--out", str(tmp_path), "contour"]) == 0
    _, rows = read_rows(tmp_path / "contour.csv")
    assert len(rows) == 12
    assert "hatch" in (tmp_path / "contour.svg").read_text()


def test_fit_missing_data(tmp_path):
    cfg = write_cfg(tmp_path, "[fit]\nimpedance_csv = \"absent.csv\"\n")
    assert main(["--config", cfg, "--out", str(tmp_path), "fit"]) == 2


def test_fit_round_trip(tmp_path, capsys):
    assert main(["--out", str(tmp_path), "impedance", "--f-min", "1e6", "--f-max", "2e7", "--n-points", "8"]) == 0
    _, rows = read_rows(tmp_path / "impedance.csv")
    data = tmp_path / "meas.csv"
    data.write_text("frequency_hz,resistance_ohm\n" +
                    "".join(f"{r['frequency_hz']},{r['R_susc_ohm']}\n" for r in rows))
    cfg = lab_cfg(tmp_path, extra=f"\n[fit]\nimpedance_csv = \"{data.name}\"\n")
    assert main(["--config", cfg, "--out", str(tmp_path), "fit"]) == 0
    _, fit = read_rows(tmp_path / "fit.csv")
    assert float(fit[0]["sigma_eff_s_per_m"]) == pytest.approx(400.0, rel=0.02)


@pytest.mark.slow
def test_simulate_lab_case(tmp_path, capsys):
    cfg = lab_cfg(tmp_path, [("grid_nr = 64", "grid_nr = 32"), ("grid_nz = 128", "grid_nz = 64")])
    assert main(["--config", cfg, "--out", str(tmp_path), "simulate"]) == 0
    _, ledger = read_rows(tmp_path / "ledger.csv")
    assert ledger
    assert "X_CO2" in capsys.readouterr().out
    for name in ("fields.csv", "profiles.csv", "radial_temperature.svg", "axial_temperature.svg"):
        assert (tmp_path / name).exists()
