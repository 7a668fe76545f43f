"""Physical constants and unit conversions.

Energies are linear frequencies in GHz (E/h). Capacitances are in fF,
inductances in nH, times in ns. Angular quantities carry an explicit 2*pi.
"""

import numpy as np
from scipy import constants

E_CHARGE = constants.e
H_PLANCK = constants.h
HBAR = constants.hbar
K_B = constants.k
PHI0 = constants.h / (2 * constants.e)
PHI0_REDUCED = PHI0 / (2 * np.pi)
R_K = constants.h / constants.e**2

# E_C = e^2 / (2 C) in GHz for C in fF
EC_PER_INV_FF = E_CHARGE**2 / 2 / 1e-15 / H_PLANCK / 1e9
# E_L = (Phi0 / 2 pi)^2 / L in GHz for L in nH
EL_PER_INV_NH = PHI0_REDUCED**2 / 1e-9 / H_PLANCK / 1e9

TWO_PI = 2 * np.pi


def charging_energy(capacitance_fF: float) -> float:
    """E_C = e^2/2C in GHz."""
    return EC_PER_INV_FF / capacitance_fF


def inductive_energy(inductance_nH: float) -> float:
    """E_L = (Phi0/2pi)^2/L in GHz."""
    return EL_PER_INV_NH / inductance_nH


def capacitance_from_ec(ec_GHz: float) -> float:
    return EC_PER_INV_FF / ec_GHz


def inductance_from_el(el_GHz: float) -> float:
    return EL_PER_INV_NH / el_GHz


def ghz_to_rad_per_s(f_GHz):
    return TWO_PI * 1e9 * np.asarray(f_GHz)
