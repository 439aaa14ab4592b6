"""Laser-diode L-I-V model, wavelength tuning and the phase-matching operating window."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import constants

from .units import photon_energy_J

SLOPE_REFERENCES = ("facet", "internal")


class BelowThresholdError(ValueError):
    pass


class NoCrossingError(ValueError):
    pass


@dataclass(frozen=True)
class DiodeParams:
    """Electro-optical parameters of the pump laser.

    ``slope_reference`` says what the slope efficiency measures: the facet
    output (default) or the internal TEB power directly.
    """

    series_resistance_ohm: float = 3.1
    turn_on_voltage_V: float = 1.6
    threshold_current_A: float = 0.420
    slope_efficiency_mW_per_A: float = 267.0
    R_teb: float = 0.79
    wavelength_ref_nm: float = 783.60
    temperature_ref_K: float = 298.15
    wavelength_slope_nm_per_K: float = 0.23
    pulse_duration_s: float = 120e-9
    repetition_rate_Hz: float = 1e4
    injection_width_um: float = 6.36
    slope_reference: str = "facet"

    def __post_init__(self):
        for name in ("series_resistance_ohm", "turn_on_voltage_V", "threshold_current_A",
                     "slope_efficiency_mW_per_A", "wavelength_ref_nm", "temperature_ref_K",
                     "pulse_duration_s", "repetition_rate_Hz", "injection_width_um"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.R_teb < 1.0:
            raise ValueError(f"R_teb must lie in [0, 1), got {self.R_teb}")
        if self.wavelength_slope_nm_per_K < 0:
            raise ValueError("wavelength slope must be non-negative")
        if self.slope_reference not in SLOPE_REFERENCES:
            raise ValueError(f"slope_reference must be one of {SLOPE_REFERENCES}")

    @property
    def duty_cycle(self):
        return self.pulse_duration_s * self.repetition_rate_Hz

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LIV:
    voltage_V: float
    output_mW: float
    internal_mW: float


def liv(p: DiodeParams, current_A):
    """Voltage, facet output power and internal power at a drive current.

    ``P_int = P_out / (1 - R_teb)``.  With ``slope_reference="internal"``
    the slope feeds ``P_int`` and ``P_out`` follows from the same relation.
    """
    I = np.asarray(current_A, dtype=float)
    if np.any(I < 0):
        raise ValueError("current must be non-negative")
    v = p.turn_on_voltage_V + p.series_resistance_ohm * I
    above = p.slope_efficiency_mW_per_A * np.maximum(I - p.threshold_current_A, 0.0)
    if p.slope_reference == "facet":
        out, internal = above, above / (1.0 - p.R_teb)
    else:
        out, internal = above * (1.0 - p.R_teb), above
    if np.ndim(I) == 0:
        return LIV(float(v), float(out), float(internal))
    return LIV(v, out, internal)


def threshold_current_density(threshold_A, width_um, length_mm):
    """Threshold current density [kA/cm^2]."""
    if width_um <= 0 or length_mm <= 0:
        raise ValueError("width and length must be positive")
    area_cm2 = width_um * 1e-4 * length_mm * 0.1
    return threshold_A / area_cm2 / 1e3


def width_for_density(threshold_A, density_kA_cm2, length_mm):
    """Injection width [um] that gives the stated threshold density."""
    return threshold_A / (density_kA_cm2 * 1e3) / (length_mm * 0.1) * 1e4


def laser_wavelength(p: DiodeParams, T):
    """Lasing wavelength [nm] following the linear band-gap trend (no mode hops)."""
    return p.wavelength_ref_nm + p.wavelength_slope_nm_per_K * (np.asarray(T, dtype=float) - p.temperature_ref_K)


@dataclass(frozen=True)
class OperatingWindow:
    crossing_K: float
    low_K: float
    high_K: float
    half_width_K: float
    unbounded: bool = False

    def contains(self, T):
        return self.unbounded or self.low_K <= T <= self.high_K


@dataclass(frozen=True)
class OperatingPoint:
    temperature_K: float
    current_A: float
    laser_nm: float
    detuning_nm: float
    in_window: bool


def _line_crossing(a1, s1, a2, s2, fwhm_nm):
    """Lines lam = a + s*T.  Returns the window around their crossing."""
    ds = s1 - s2
    if ds == 0:
        if math.isclose(a1, a2, rel_tol=0, abs_tol=1e-12):
            return OperatingWindow(math.nan, -math.inf, math.inf, math.inf, unbounded=True)
        raise NoCrossingError("laser and phase-matching lines are parallel and never cross")
    T = (a2 - a1) / ds
    hw = (fwhm_nm / 2.0) / abs(ds)
    return OperatingWindow(T, T - hw, T + hw, hw)


def operating_window(p: DiodeParams, pm_slope_nm_per_K, pm_center_nm, pm_temperature_K, fwhm_nm):
    """Temperature window where the laser line lies within FWHM/2 of phase matching.

    The phase-matching line passes through ``pm_center_nm`` at
    ``pm_temperature_K`` with slope ``pm_slope_nm_per_K``; all wavelengths are
    on the same (pump) axis as the laser.
    """
    if fwhm_nm < 0:
        raise ValueError("FWHM must be non-negative")
    a_l = p.wavelength_ref_nm - p.wavelength_slope_nm_per_K * p.temperature_ref_K
    a_pm = pm_center_nm - pm_slope_nm_per_K * pm_temperature_K
    return _line_crossing(a_l, p.wavelength_slope_nm_per_K, a_pm, pm_slope_nm_per_K, fwhm_nm)


def operating_point(p: DiodeParams, T, current_A, pm_slope_nm_per_K, pm_center_nm, pm_temperature_K, fwhm_nm):
    lam = float(laser_wavelength(p, T))
    det = lam - (pm_center_nm + pm_slope_nm_per_K * (T - pm_temperature_K))
    return OperatingPoint(float(T), float(current_A), lam, det, abs(det) <= fwhm_nm / 2.0)


def window_sweep(p: DiodeParams, temperatures, pm_slope_nm_per_K, pm_center_nm, pm_temperature_K, fwhm_nm,
                 current_A=0.0):
    return [operating_point(p, T, current_A, pm_slope_nm_per_K, pm_center_nm, pm_temperature_K, fwhm_nm)
            for T in temperatures]


def write_window_report(window: OperatingWindow, sweep, csv_path=None, json_path=None, extra=None):
    if csv_path is not None:
        with open(csv_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["T_K", "lambda_laser_nm", "lambda_pm_nm", "detuning_nm", "in_window"])
            for op in sweep:
                wr.writerow([f"{op.temperature_K:.4f}", f"{op.laser_nm:.6f}",
                             f"{op.laser_nm - op.detuning_nm:.6f}", f"{op.detuning_nm:.6f}", int(op.in_window)])
    doc = {
        "crossing_K": None if math.isnan(window.crossing_K) else window.crossing_K,
        "window_K": [None if math.isinf(window.low_K) else window.low_K,
                     None if math.isinf(window.high_K) else window.high_K],
        "half_width_K": None if math.isinf(window.half_width_K) else window.half_width_K,
        "unbounded": window.unbounded,
        **(extra or {}),
    }
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return doc


@dataclass(frozen=True)
class PairsPerElectron:
    pairs_per_electron: float
    photons_per_electron: float
    pair_probability: float


def pairs_per_electron(p: DiodeParams, current_A, pair_prob, pump_nm, slope_reference="internal"):
    """Pairs per electron injected above threshold.

    Internal photons per electron, ``P_int / (I - I_th) * e / E_photon``,
    multiplied by the pair probability per pump photon.  The efficiency
    chain is quoted against the internal-power slope, so by default the
    slope efficiency is read as internal power here; pass
    ``slope_reference=None`` to use the convention stored in ``p``.
    """
    if slope_reference is not None:
        p = replace(p, slope_reference=slope_reference)
    if current_A <= p.threshold_current_A:
        raise BelowThresholdError(f"I={current_A} A is not above threshold {p.threshold_current_A} A")
    if pair_prob < 0:
        raise ValueError("pair probability must be non-negative")
    r = liv(p, current_A)
    photons = r.internal_mW * 1e-3 / (current_A - p.threshold_current_A) * constants.e / photon_energy_J(pump_nm)
    return PairsPerElectron(photons * pair_prob, photons, pair_prob)


def electrons_per_pulse(p: DiodeParams, current_A, pulse_s=None):
    """Electrons injected above threshold during one pulse."""
    t = p.pulse_duration_s if pulse_s is None else pulse_s
    return max(current_A - p.threshold_current_A, 0.0) * t / constants.e


def pairs_per_pulse(p: DiodeParams, current_A, pair_prob, pump_nm, pulse_s=None, slope_reference="internal"):
    """Expected pairs per current pulse from the per-electron efficiency."""
    ppe = pairs_per_electron(p, current_A, pair_prob, pump_nm, slope_reference).pairs_per_electron
    return ppe * electrons_per_pulse(p, current_A, pulse_s)
