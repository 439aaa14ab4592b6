"""Physical constants and the unit conversions used across the package.

Internal conventions: wavelengths in nm, lengths along the guide in cm,
losses in cm^-1, wavevector mismatch in rad/cm, temperatures in K.
"""
import numpy as np
from scipy import constants

HC_EV_NM = constants.h * constants.c / constants.e * 1e9  # photon energy [eV] * wavelength [nm]
ZERO_CELSIUS = constants.zero_Celsius


def celsius_to_kelvin(t_c):
    return t_c + ZERO_CELSIUS


def kelvin_to_celsius(t_k):
    return t_k - ZERO_CELSIUS


def photon_energy_eV(wavelength_nm):
    return HC_EV_NM / wavelength_nm


def photon_energy_J(wavelength_nm):
    return constants.h * constants.c / (wavelength_nm * 1e-9)


def nm_to_hz_bandwidth(delta_nm, center_nm):
    """Frequency width [Hz] of a small wavelength interval centred on `center_nm`."""
    return constants.c * (delta_nm * 1e-9) / (center_nm * 1e-9) ** 2


def hz_to_nm_bandwidth(delta_hz, center_nm):
    return delta_hz * (center_nm * 1e-9) ** 2 / constants.c * 1e9


def wavenumber_per_cm(n, wavelength_nm):
    """Propagation constant 2*pi*n/lambda in rad/cm."""
    return 2 * np.pi * n / (wavelength_nm * 1e-7)


def alpha_from_imag_index(n_imag, wavelength_nm):
    """Intensity attenuation [cm^-1] for an imaginary (effective) index."""
    return 4 * np.pi * n_imag / (wavelength_nm * 1e-7)


def imag_index_from_alpha(alpha_cm, wavelength_nm):
    return alpha_cm * (wavelength_nm * 1e-7) / (4 * np.pi)


def efficiency_pct_to_per_watt(eta_pct_w_cm2, length_cm):
    """Convert a normalized efficiency [%/(W cm^2)] into eta*L^2 [1/W]."""
    return eta_pct_w_cm2 / 100.0 * length_cm**2
