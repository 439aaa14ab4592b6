"""Refractive index and loss models for Al(x)Ga(1-x)As layers.

Dispersion is driven by a coefficient table (JSON) rather than hard-coded
numbers.  Two analytic families are understood:

``afromowitz``
    Modified single-oscillator model with a Varshni band-gap shift for the
    temperature dependence.  The photon energy is given a small imaginary
    broadening so the index stays finite through the band edge; only the
    real part is returned.
``cauchy``
    ``n = a(x) + b(x) / lambda**2`` with rows keyed by composition and linear
    interpolation in between.  Mostly useful for tests and as a template for
    drop-in tables.

Both accept a uniform thermo-optic term ``dn_dT`` from the table header.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .units import HC_EV_NM

DATA_ENV = "PAIRFORGE_DATA"
DEFAULT_TABLE = "algaas_dispersion.json"
SCHEMA_VERSION = 1


class DispersionRangeError(ValueError):
    """A material query fell outside the validity range of a table."""

    def __init__(self, quantity, value, bounds, model=""):
        self.quantity = quantity
        self.value = value
        self.bounds = tuple(bounds)
        lo, hi = self.bounds
        side = "lower" if np.any(np.asarray(value) < lo) else "upper"
        super().__init__(
            f"{quantity}={np.asarray(value).tolist()} violates {side} bound "
            f"of [{lo}, {hi}] in dispersion table '{model}'"
        )


@dataclass(frozen=True)
class MaterialPoint:
    composition_x: float
    wavelength: float  # nm
    temperature: float  # K

    def __post_init__(self):
        if not 0.0 <= self.composition_x <= 1.0:
            raise ValueError(f"composition_x must lie in [0, 1], got {self.composition_x}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")


@dataclass(frozen=True, eq=False)
class DispersionTable:
    model: str
    coefficients: dict
    wavelength_range: tuple = (600.0, 2500.0)
    temperature_range: tuple = (1.0, 500.0)
    composition_range: tuple = (0.0, 1.0)
    reference_temperature: float = 300.0
    dn_dT: float = 0.0
    calibration_rows: tuple = ()
    name: str = ""
    meta: dict = field(default_factory=dict)

    def check(self, x, wavelength, temperature):
        for quantity, value, bounds in (
            ("composition_x", x, self.composition_range),
            ("wavelength_nm", wavelength, self.wavelength_range),
            ("temperature_K", temperature, self.temperature_range),
        ):
            v = np.asarray(value, dtype=float)
            if np.any(v < bounds[0]) or np.any(v > bounds[1]) or not np.all(np.isfinite(v)):
                raise DispersionRangeError(quantity, value, bounds, self.name or self.model)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model,
            "name": self.name,
            "units": {"wavelength": "nm", "temperature": "K", "energy": "eV", "loss": "cm^-1"},
            "validity": {
                "wavelength_nm": list(self.wavelength_range),
                "temperature_K": list(self.temperature_range),
                "composition_x": list(self.composition_range),
            },
            "reference_temperature_K": self.reference_temperature,
            "dn_dT_per_K": self.dn_dT,
            "coefficients": self.coefficients,
            "calibration_rows": [dict(r) for r in self.calibration_rows],
            **({"meta": self.meta} if self.meta else {}),
        }


def table_from_dict(doc, name=""):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported dispersion table schema_version {doc.get('schema_version')!r}")
    units = doc.get("units", {})
    if units.get("wavelength", "nm") != "nm" or units.get("temperature", "K") != "K":
        raise ValueError(f"dispersion table units must be nm and K, got {units}")
    model = doc["model"]
    if model not in _MODELS:
        raise ValueError(f"unknown dispersion model {model!r}")
    coeffs = doc["coefficients"]
    _check_finite(coeffs, model)
    validity = doc.get("validity", {})
    return DispersionTable(
        model=model,
        coefficients=coeffs,
        wavelength_range=tuple(validity.get("wavelength_nm", (600.0, 2500.0))),
        temperature_range=tuple(validity.get("temperature_K", (1.0, 500.0))),
        composition_range=tuple(validity.get("composition_x", (0.0, 1.0))),
        reference_temperature=float(doc.get("reference_temperature_K", 300.0)),
        dn_dT=float(doc.get("dn_dT_per_K", 0.0)),
        calibration_rows=tuple(doc.get("calibration_rows", ())),
        name=doc.get("name", name),
        meta=doc.get("meta", {}),
    )


def _check_finite(obj, where):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")
    elif isinstance(obj, (int, float)) and not np.isfinite(obj):
        raise ValueError(f"non-finite coefficient at {where}")


def data_path(filename):
    """Resolve a data file, honouring the PAIRFORGE_DATA override."""
    override = os.environ.get(DATA_ENV)
    if override:
        p = Path(override)
        if p.is_file() and (p.name == filename or filename == DEFAULT_TABLE):
            return p
        if (p / filename).is_file():
            return p / filename
    return Path(str(resources.files("pairforge") / "data" / filename))


def load_table(path=None):
    """Load a dispersion table.

    With no argument the packaged AlGaAs table is used, unless the
    ``PAIRFORGE_DATA`` environment variable points at a replacement file or
    a directory containing ``algaas_dispersion.json``.
    """
    p = Path(path) if path is not None else data_path(DEFAULT_TABLE)
    with open(p) as fh:
        doc = json.load(fh)
    return table_from_dict(doc, name=p.stem)


_DEFAULT = {}


def default_table():
    key = os.environ.get(DATA_ENV, "")
    if key not in _DEFAULT:
        _DEFAULT[key] = load_table()
    return _DEFAULT[key]


# -- models ------------------------------------------------------------------

def _poly(c, x):
    return sum(ci * x**i for i, ci in enumerate(c))


def _afromowitz(c, x, wavelength, temperature, t_ref):
    a, b = c["varshni_alpha_eV_per_K"], c["varshni_beta_K"]
    shift = -(a * temperature**2 / (temperature + b) - a * t_ref**2 / (t_ref + b))
    eg = _poly(c["Eg_eV"], x) + shift
    e0 = _poly(c["E0_eV"], x) + c.get("oscillator_thermal_shift", 1.0) * shift
    ed = _poly(c["Ed_eV"], x)
    e = HC_EV_NM / wavelength + 1j * c.get("broadening_eV", 0.0)
    ef2 = 2 * e0**2 - eg**2
    eta = np.pi * ed / (2 * e0**3 * (e0**2 - eg**2))
    m1 = eta / (2 * np.pi) * (ef2**2 - eg**4)
    m3 = eta / (2 * np.pi) * (ef2 - eg**2)
    eps = 1 + m1 + m3 * e**2 + eta / np.pi * e**4 * np.log((ef2 - e**2) / (eg**2 - e**2))
    return np.sqrt(eps).real


def _cauchy(c, x, wavelength, temperature, t_ref):
    rows = sorted(c["rows"], key=lambda r: r["x"])
    xs = np.array([r["x"] for r in rows], dtype=float)
    a = np.interp(x, xs, [r["a"] for r in rows])
    b = np.interp(x, xs, [r.get("b_nm2", 0.0) for r in rows])
    return a + b / np.asarray(wavelength, dtype=float) ** 2


_MODELS = {"afromowitz": _afromowitz, "cauchy": _cauchy}


def index(x, wavelength, temperature, table=None):
    """Vectorised real refractive index for compositions/wavelengths/temperatures."""
    table = table or default_table()
    table.check(x, wavelength, temperature)
    n = _MODELS[table.model](table.coefficients, np.asarray(x, dtype=float),
                             np.asarray(wavelength, dtype=float),
                             np.asarray(temperature, dtype=float), table.reference_temperature)
    n = n + table.dn_dT * (np.asarray(temperature, dtype=float) - table.reference_temperature)
    return n if np.ndim(n) else float(n)


def refractive_index(p: MaterialPoint, table: DispersionTable | None = None) -> float:
    return float(index(p.composition_x, p.wavelength, p.temperature, table))


# -- losses ------------------------------------------------------------------

@dataclass(frozen=True)
class LossModel:
    """Per-layer intensity loss: a doping-independent floor plus free-carrier absorption.

    ``alpha = alpha_undoped + cross_section * doping * (lambda / lambda_ref)**2``
    """

    doping_cm3: float = 0.0
    alpha_undoped_cm1: float = 0.1
    cross_section_cm2: float = 3.0e-18
    reference_wavelength_nm: float = 1570.0
    rule: str = "free_carrier_lambda2"

    def __post_init__(self):
        if self.doping_cm3 < 0:
            raise ValueError(f"doping must be non-negative, got {self.doping_cm3}")
        if self.alpha_undoped_cm1 < 0 or self.cross_section_cm2 < 0:
            raise ValueError("loss coefficients must be non-negative")
        if self.rule not in ("free_carrier_lambda2", "constant"):
            raise ValueError(f"unknown loss scaling rule {self.rule!r}")

    def with_doping(self, doping_cm3):
        return LossModel(doping_cm3, self.alpha_undoped_cm1, self.cross_section_cm2,
                         self.reference_wavelength_nm, self.rule)


def layer_loss(model: LossModel, wavelength) -> float:
    """Intensity loss coefficient [cm^-1] of a layer at `wavelength` [nm]."""
    if np.any(np.asarray(wavelength) <= 0):
        raise ValueError("wavelength must be positive")
    scale = 1.0 if model.rule == "constant" else (np.asarray(wavelength) / model.reference_wavelength_nm) ** 2
    return model.alpha_undoped_cm1 + model.cross_section_cm2 * model.doping_cm3 * scale
