"""TOML run configuration with unit-suffixed keys.

Every physical quantity carries its unit in the key name (``radius_m``,
``frequency_hz``). Unknown keys are rejected with the line they appear on.
"""

from __future__ import annotations

import hashlib
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError

UNIT_SUFFIXES = ("_m", "_hz", "_s_per_m", "_a", "_k", "_pa", "_w_per_m_k", "_j_per_mol",
                 "_mol_per_s_m3_pa2", "_per_h", "_ohm", "_w")

NUM = (int, float)

# key -> (type, required)
SCHEMA: dict[str, dict[str, tuple]] = {
    "susceptor": {
        "series": (str, False),  # "scale" | "lab" | "explicit"
        "beta": (NUM, False),
        "radius_m": (NUM, False),
        "length_m": (NUM, False),
        "sigma_eff_s_per_m": (NUM, False),
    },
    "susceptor.profile": {
        "kind": (str, False),
        "p": (NUM, False),
        "A": (NUM, False),
        "core_fraction": (NUM, False),
    },
    "coil": {
        "turns": (int, False),
        "coil_radius_m": (NUM, False),
        "half_length_m": (NUM, False),
        "conductor_radius_m": (NUM, False),
        "pitch_m": (NUM, False),
        "wire_diameter_m": (NUM, False),
        "conductivity_s_per_m": (NUM, False),
        "frequency_hz": (NUM, False),
        "rms_current_a": (NUM, False),
        "check_frequencies_hz": (list, False),
    },
    "feed": {
        "h2_co2_ratio": (NUM, False),
        "inlet_temperature_k": (NUM, False),
        "pressure_pa": (NUM, False),
        "ghsv_per_h": (NUM, False),
        "target_t_max_k": (NUM, False),
    },
    "bed": {
        "heating_mode": (str, False),
        "void_fraction": (NUM, False),
        "k_eff_w_per_m_k": (NUM, False),
        "pre_exponential_mol_per_s_m3_pa2": (NUM, False),
        "activation_energy_j_per_mol": (NUM, False),
        "activation_floor_k": (NUM, False),
        "activation_ramp_k": (NUM, False),
    },
    "insulation": {
        "thickness_m": (NUM, False),
        "k_ins_w_per_m_k": (NUM, False),
        "ambient_temperature_k": (NUM, False),
    },
    "sweep": {
        "betas": (list, False),
        "reactor_types": (list, False),
        "target_conversion": (NUM, False),
        "target_t_max_k": (NUM, False),
        "eta_power_electronics": (NUM, False),
        "ghsv_ref_per_h": (NUM, False),
        "workers": (int, False),
        "f_min_hz": (NUM, False),
        "f_max_hz": (NUM, False),
        "n_frequencies": (int, False),
        "beta_min": (NUM, False),
        "beta_max": (NUM, False),
        "n_betas": (int, False),
    },
    "numerics": {
        "grid_nr": (int, False),
        "grid_nz": (int, False),
        "relaxation": (NUM, False),
        "tolerance": (NUM, False),
        "max_iterations": (int, False),
        "em_nodes": (int, False),
        "radial_nodes": (int, False),
    },
    "fit": {
        "impedance_csv": (str, False),
        "max_residual": (NUM, False),
    },
}


@dataclass
class RunConfig:
    data: dict
    source: str = "<defaults>"
    text: str = ""
    base_dir: Path = field(default_factory=Path.cwd)

    def get(self, section, key, default=None):
        sec = self.data
        for part in section.split("."):
            sec = sec.get(part, {})
        return sec.get(key, default)

    def section(self, name):
        sec = self.data
        for part in name.split("."):
            sec = sec.get(part, {})
        return {k: v for k, v in sec.items() if not isinstance(v, dict)}

    def digest(self):
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]


def _line_of(text, section, key):
    """1-based line number of ``key`` inside ``[section]``, or None."""
    current = ""
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]", s)
        if m:
            current = m.group(1)
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*=", s):
            return n
    return None


def _where(cfg_src, text, section, key):
    n = _line_of(text, section, key)
    return f"{cfg_src}:{n}" if n else cfg_src


def _validate(data: dict, text: str, src: str):
    errors = []

    def walk(tbl, prefix):
        for k, v in tbl.items():
            name = f"{prefix}.{k}" if prefix else k
            if isinstance(v, dict):
                if name not in SCHEMA:
                    errors.append(f"{src}: unknown section [{name}]")
                    continue
                walk(v, name)
                continue
            if prefix not in SCHEMA:
                errors.append(f"{src}: key {k!r} outside any known section")
                continue
            allowed = SCHEMA[prefix]
            loc = _where(src, text, prefix, k)
            if k not in allowed:
                hint = ""
                if not k.endswith(UNIT_SUFFIXES) and any(a.startswith(k + "_") for a in allowed):
                    cand = [a for a in allowed if a.startswith(k + "_")]
                    hint = f" (missing unit suffix; did you mean {cand[0]!r}?)"
                elif not k.endswith(UNIT_SUFFIXES):
                    hint = " (physical quantities need a unit suffix such as _m or _hz)"
                errors.append(f"{loc}: unknown key {k!r} in [{prefix}]{hint}")
                continue
            typ = allowed[k][0]
            if typ is int and isinstance(v, bool) or not isinstance(v, typ):
                errors.append(f"{loc}: key {k!r} has wrong type {type(v).__name__}")
            elif isinstance(v, float) and not math.isfinite(v):
                errors.append(f"{loc}: key {k!r} must be finite")

    walk(data, "")
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))


def load_config(path: Optional[str] = None) -> RunConfig:
    """Read and validate a config file; ``None`` gives the packaged defaults."""
    if path is None:
        p = Path(__file__).with_name("data") / "default_config.toml"
    else:
        p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, str(p), p.parent)


def parse_config(text: str, source: str = "<string>", base_dir: Optional[Path] = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    _validate(data, text, source)
    return RunConfig(data, source, text, base_dir or Path.cwd())


def require(cfg: RunConfig, section: str, key: str) -> Any:
    v = cfg.get(section, key)
    if v is None:
        raise ConfigError(f"{cfg.source}: missing required key {key!r} in [{section}]")
    return v
