"""Epitaxial layer stack, ridge geometry and facet data.

Device files are JSON.  Layers are listed bottom (substrate side) to top.
An entry may be a plain layer or a ``bragg`` block that expands into
alternating layers; missing Bragg thicknesses default to quarter-wave at the
block's design wavelength.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from . import materials
from .materials import DispersionTable, LossModel

SCHEMA_VERSION = 1
CORE_LABELS = ("core", "qw")
CLAD_TAGS = ("mirror", "bragg", "clad")
# Mirror doping as written with positive exponents, or literally as printed
# with negative ones (value d read as 1/d, i.e. effectively undoped).
DOPING_READINGS = ("positive_exponent", "as_printed")


class SchemaError(ValueError):
    """Invalid device document.  `path` locates the offending entry."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Layer:
    x: float
    thickness_nm: float
    doping_cm3: float = 0.0
    label: str = ""

    def __post_init__(self):
        name = self.label or "<unlabelled>"
        if not self.thickness_nm > 0:
            raise SchemaError(f"layer '{name}'", f"thickness_nm must be > 0, got {self.thickness_nm}")
        if not 0.0 <= self.x <= 1.0:
            raise SchemaError(f"layer '{name}'", f"x must lie in [0, 1], got {self.x}")
        if self.doping_cm3 < 0:
            raise SchemaError(f"layer '{name}'", f"doping_cm3 must be >= 0, got {self.doping_cm3}")

    @property
    def is_core(self):
        return self.label.lower().startswith(CORE_LABELS)

    @property
    def is_cladding(self):
        return any(tag in self.label.lower() for tag in CLAD_TAGS)


@dataclass(frozen=True)
class Ridge:
    width_um: float = 6.0
    etch_depth_um: float = 2.0
    length_mm: float = 2.0

    def __post_init__(self):
        if min(self.width_um, self.etch_depth_um, self.length_mm) <= 0:
            raise SchemaError("ridge", "width, etch depth and length must be positive")

    @property
    def length_cm(self):
        return self.length_mm / 10.0


@dataclass(frozen=True)
class Facets:
    """Modal power reflectivities of the cleaved facets."""

    R_teb: float = 0.79
    R_te00: float = 0.27
    R_tm00: float = 0.25

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not 0.0 <= v < 1.0:
                raise SchemaError(f"facets/{k}", f"reflectivity must lie in [0, 1), got {v}")


@dataclass(frozen=True)
class LayerStack:
    layers: tuple
    substrate_x: float = 0.0
    superstrate_index: float = 1.0
    ridge: Ridge = field(default_factory=Ridge)
    facets: Facets = field(default_factory=Facets)
    temperature_K: float = 293.15
    loss: LossModel | None = None
    name: str = ""

    def __post_init__(self):
        if not self.layers:
            raise SchemaError("layers", "at least one layer is required")
        if not 0.0 <= self.substrate_x <= 1.0:
            raise SchemaError("substrate/x", f"x must lie in [0, 1], got {self.substrate_x}")
        if self.superstrate_index < 1.0:
            raise SchemaError("superstrate/index", "index must be >= 1")
        if self.temperature_K <= 0:
            raise SchemaError("temperature_K", "temperature must be positive")

    @property
    def total_thickness_nm(self):
        return float(sum(layer.thickness_nm for layer in self.layers))

    @property
    def interfaces_nm(self):
        """Interface depths measured upward from the substrate, length len(layers)+1."""
        return np.concatenate([[0.0], np.cumsum([layer.thickness_nm for layer in self.layers])])

    @property
    def core_mask(self):
        return np.array([layer.is_core for layer in self.layers])

    @property
    def clad_mask(self):
        return np.array([layer.is_cladding for layer in self.layers])

    def at_temperature(self, temperature_K):
        return replace(self, temperature_K=float(temperature_K))

    def with_layers(self, layers):
        return replace(self, layers=tuple(layers))

    def indices(self, wavelength, table: DispersionTable | None = None, lossy=False):
        """Complex index of (substrate, layers..., superstrate) at `wavelength` [nm].

        With ``lossy=True`` each layer gets an imaginary part from the stack's
        loss model and its doping.
        """
        table = table or materials.default_table()
        xs = np.array([self.substrate_x] + [layer.x for layer in self.layers])
        n = np.asarray(materials.index(xs, wavelength, self.temperature_K, table), dtype=complex)
        if lossy and self.loss is not None:
            from .units import imag_index_from_alpha
            dop = np.array([0.0] + [layer.doping_cm3 for layer in self.layers])
            alpha = np.array([materials.layer_loss(self.loss.with_doping(d), wavelength) for d in dop])
            alpha[0] = 0.0
            n = n + 1j * imag_index_from_alpha(alpha, wavelength)
        return np.concatenate([n, [complex(self.superstrate_index)]])


# -- Bragg mirrors -----------------------------------------------------------

def quarter_wave_thickness(design_wavelength, n, n_eff=None):
    """Quarter-wave thickness [nm]; with `n_eff` the transverse (angled) condition is used."""
    if n_eff is None:
        return design_wavelength / (4.0 * n)
    kt = np.sqrt(n**2 - n_eff**2 + 0j)
    if kt.imag != 0 or kt.real == 0:
        raise ValueError(f"n_eff={n_eff} is not below layer index {n}; no transverse quarter-wave")
    return design_wavelength / (4.0 * kt.real)


def build_bragg(design_wavelength, periods, x_high, x_low, T, table=None, *,
                first="high", doping=(0.0, 0.0), label="bragg", thickness_high=None, thickness_low=None):
    """Alternating mirror layers, 2*periods of them.

    `x_high`/`x_low` name the compositions of the two layer kinds (high and
    low Al fraction).  `first` picks which one sits at the bottom.  `doping`
    is a (first, last) pair graded geometrically across the block.
    """
    if periods < 1:
        raise ValueError(f"periods must be >= 1, got {periods}")
    table = table or materials.default_table()
    t_high = thickness_high or quarter_wave_thickness(
        design_wavelength, materials.index(x_high, design_wavelength, T, table))
    t_low = thickness_low or quarter_wave_thickness(
        design_wavelength, materials.index(x_low, design_wavelength, T, table))
    pair = [(x_high, t_high, "H"), (x_low, t_low, "L")]
    if first == "low":
        pair.reverse()
    n_layers = 2 * periods
    d0, d1 = doping
    if d0 > 0 and d1 > 0:
        dop = np.geomspace(d0, d1, n_layers)
    else:
        dop = np.linspace(d0, d1, n_layers)
    return [
        Layer(x=float(x), thickness_nm=float(t), doping_cm3=float(dop[i]), label=f"{label}_{i // 2 + 1}{kind}")
        for i, (x, t, kind) in enumerate(pair[i % 2] for i in range(n_layers))
    ]


# -- parsing -----------------------------------------------------------------

_LAYER = {
    "type": "object",
    "required": ["x", "thickness_nm"],
    "properties": {
        "x": {"type": "number"},
        "thickness_nm": {"type": "number"},
        "doping_cm3": {"type": "number"},
        "label": {"type": "string"},
    },
    "additionalProperties": False,
}
_BRAGG = {
    "type": "object",
    "required": ["bragg"],
    "properties": {
        "bragg": {
            "type": "object",
            "required": ["periods", "x_high", "x_low"],
            "properties": {
                "periods": {"type": "integer"},
                "x_high": {"type": "number"},
                "x_low": {"type": "number"},
                "first": {"enum": ["high", "low"]},
                "design_wavelength_nm": {"type": "number"},
                "thickness_high_nm": {"type": "number"},
                "thickness_low_nm": {"type": "number"},
                "doping_cm3": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "label": {"type": "string"},
            },
            "additionalProperties": False,
        }
    },
    "additionalProperties": False,
}
STACK_SCHEMA = {
    "type": "object",
    "required": ["substrate", "layers", "ridge", "facets", "temperature_K"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "substrate": {"type": "object", "required": ["x"], "properties": {"x": {"type": "number"}}},
        "superstrate": {"type": "object", "properties": {"index": {"type": "number"}}},
        "layers": {"type": "array", "minItems": 1, "items": {"oneOf": [_LAYER, _BRAGG]}},
        "ridge": {
            "type": "object",
            "required": ["width_um", "etch_depth_um", "length_mm"],
            "properties": {k: {"type": "number"} for k in ("width_um", "etch_depth_um", "length_mm")},
        },
        "facets": {
            "type": "object",
            "required": ["R_teb", "R_te00", "R_tm00"],
            "properties": {k: {"type": "number"} for k in ("R_teb", "R_te00", "R_tm00")},
        },
        "temperature_K": {"type": "number"},
        "doping_reading": {"enum": list(DOPING_READINGS)},
        "loss": {
            "type": "object",
            "properties": {
                "alpha_undoped_cm1": {"type": "number"},
                "cross_section_cm2": {"type": "number"},
                "reference_wavelength_nm": {"type": "number"},
                "rule": {"type": "string"},
            },
        },
    },
}


def _path(err):
    return "/".join(str(p) for p in err.absolute_path)


def parse_stack(doc, table: DispersionTable | None = None) -> LayerStack:
    """Build a LayerStack from a decoded device document.

    Unknown top-level sections (``diode``, notes, ...) are ignored so the same
    file can carry parameters for other parts of the package.
    """
    try:
        jsonschema.validate(doc, STACK_SCHEMA)
    except jsonschema.ValidationError as err:
        best = jsonschema.exceptions.best_match([err]) or err
        raise SchemaError(_path(best), best.message) from None

    layers = []
    for i, entry in enumerate(doc["layers"]):
        where = f"layers/{i}"
        if "bragg" in entry:
            b = entry["bragg"]
            label = b.get("label", f"bragg{i}")
            for key in ("x_high", "x_low"):
                if not 0 <= b[key] <= 1:
                    raise SchemaError(f"{where}/bragg/{key}", f"x must lie in [0, 1] (block '{label}')")
            if b["periods"] < 1:
                raise SchemaError(f"{where}/bragg/periods", f"periods must be >= 1 (block '{label}')")
            for key in ("thickness_high_nm", "thickness_low_nm"):
                if key in b and b[key] <= 0:
                    raise SchemaError(f"{where}/bragg/{key}", f"thickness must be > 0 (block '{label}')")
            doping = tuple(b.get("doping_cm3", (0.0, 0.0)))
            if doc.get("doping_reading") == "as_printed":
                doping = tuple(1.0 / d if d > 0 else 0.0 for d in doping)
            layers += build_bragg(
                b.get("design_wavelength_nm", 785.0), b["periods"], b["x_high"], b["x_low"],
                doc["temperature_K"], table, first=b.get("first", "high"),
                doping=doping, label=label,
                thickness_high=b.get("thickness_high_nm"), thickness_low=b.get("thickness_low_nm"),
            )
        else:
            try:
                layers.append(Layer(entry["x"], entry["thickness_nm"], entry.get("doping_cm3", 0.0),
                                    entry.get("label", "")))
            except SchemaError as err:
                raise SchemaError(f"{where} ({err.path})", str(err).split(": ", 1)[1]) from None

    loss = None
    if "loss" in doc:
        loss = LossModel(0.0, **doc["loss"])
    return LayerStack(
        layers=tuple(layers),
        substrate_x=float(doc["substrate"]["x"]),
        superstrate_index=float(doc.get("superstrate", {}).get("index", 1.0)),
        ridge=Ridge(**doc["ridge"]),
        facets=Facets(**doc["facets"]),
        temperature_K=float(doc["temperature_K"]),
        loss=loss,
        name=doc.get("name", ""),
    )


def stack_to_dict(stack: LayerStack) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": stack.name,
        "substrate": {"x": stack.substrate_x},
        "superstrate": {"index": stack.superstrate_index},
        "layers": [asdict(layer) for layer in stack.layers],
        "ridge": asdict(stack.ridge),
        "facets": asdict(stack.facets),
        "temperature_K": stack.temperature_K,
    }
    if stack.loss is not None:
        loss = asdict(stack.loss)
        loss.pop("doping_cm3")
        doc["loss"] = loss
    return doc


def serialize_stack(stack: LayerStack) -> str:
    return json.dumps(stack_to_dict(stack), indent=2, sort_keys=True) + "\n"


def load_device(path=None, table=None):
    """Parse a device JSON file (default: the packaged reference device)."""
    doc = read_device_doc(path)
    return parse_stack(doc, table)


def read_device_doc(path=None):
    if path is None:
        path = materials.data_path("paper_device.json")
    with open(Path(path)) as fh:
        return json.load(fh)
