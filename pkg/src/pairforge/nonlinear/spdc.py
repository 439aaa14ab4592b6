"""Pair-generation probability of SPDC from the measured SHG efficiency."""
from __future__ import annotations

from ..units import efficiency_pct_to_per_watt, nm_to_hz_bandwidth, photon_energy_J


def spdc_pair_probability(eta_pct, length_cm, pump_nm, bandwidth_hz):
    """Pairs per pump photon = eta[W^-1] * hbar*omega_p * delta_nu.

    ``bandwidth_hz`` is the effective down-conversion bandwidth; how it is
    chosen is left to the caller (see :func:`bandwidth_from_nm`).
    """
    for name, v in (("eta_pct", eta_pct), ("length_cm", length_cm), ("pump_nm", pump_nm)):
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if bandwidth_hz < 0:
        raise ValueError(f"bandwidth must be non-negative, got {bandwidth_hz}")
    return efficiency_pct_to_per_watt(eta_pct, length_cm) * photon_energy_J(pump_nm) * bandwidth_hz


def bandwidth_from_nm(delta_nm, signal_nm):
    """Convert a wavelength bandwidth at the signal wavelength to Hz."""
    return nm_to_hz_bandwidth(delta_nm, signal_nm)
