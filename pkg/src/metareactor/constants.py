"""Physical constants shared across modules (SI units)."""

import math

MU0 = 4e-7 * math.pi  # vacuum permeability, H/m
R_GAS = 8.314462618  # J/(mol K)
T_STANDARD = 298.15  # K, reference for formation data
INCH = 0.0254  # m
COPPER_CONDUCTIVITY = 5.8e7  # S/m
