import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairforge import layerstack, materials, modesolver
from pairforge.layerstack import Layer, LayerStack, SchemaError

from oracles import rouard_reflectance


def test_device_device_layout(device_stack):
    labels = [l.label for l in device_stack.layers]
    lower = [l for l in labels if l.startswith("lower_mirror")]
    upper = [l for l in labels if l.startswith("upper_mirror")]
    assert len(lower) == 12 and len(upper) == 12
    core = sum(l.thickness_nm for l in device_stack.layers if l.is_core)
    assert core == pytest.approx(298.0)
    qw = next(l for l in device_stack.layers if l.label == "qw")
    assert qw.thickness_nm == pytest.approx(8.5) and qw.x == pytest.approx(0.11)
    cap = device_stack.layers[-1]
    assert cap.label == "cap" and cap.thickness_nm == pytest.approx(230.0)


def test_mirror_doping_grades_toward_core(device_stack):
    lower = [l.doping_cm3 for l in device_stack.layers if l.label.startswith("lower_mirror")]
    assert lower[0] > lower[-1]


def test_as_printed_doping_reading(table):
    doc = layerstack.read_device_doc()
    doc["doping_reading"] = "as_printed"
    s = layerstack.parse_stack(doc, table)
    mirror = [l.doping_cm3 for l in s.layers if "mirror" in l.label]
    assert max(mirror) < 1.0


layer_st = st.builds(
    Layer,
    x=st.floats(0.0, 1.0, allow_nan=False),
    thickness_nm=st.floats(0.5, 2000.0, allow_nan=False),
    doping_cm3=st.floats(0.0, 1e20, allow_nan=False),
    label=st.sampled_from(["", "core", "qw", "bragg_1H", "cap", "spacer"]),
)


@settings(max_examples=60, deadline=None)
@given(layers=st.lists(layer_st, min_size=1, max_size=8), sub=st.floats(0.0, 1.0),
       T=st.floats(250.0, 400.0), sup=st.floats(1.0, 3.0))
def test_serialize_round_trip(layers, sub, T, sup):
    s = LayerStack(tuple(layers), substrate_x=sub, superstrate_index=sup, temperature_K=T)
    import json

    again = layerstack.parse_stack(json.loads(layerstack.serialize_stack(s)))
    assert again == s


def test_device_round_trip(device_stack, table):
    import json

    again = layerstack.parse_stack(json.loads(layerstack.serialize_stack(device_stack)), table)
    assert again == device_stack


def test_negative_thickness_names_layer():
    doc = layerstack.read_device_doc()
    doc["layers"][1]["thickness_nm"] = -1.0
    with pytest.raises(SchemaError) as exc:
        layerstack.parse_stack(doc)
    assert "core_lower" in str(exc.value)


def test_missing_field_has_path():
    doc = layerstack.read_device_doc()
    del doc["layers"][2]["x"]
    with pytest.raises(SchemaError) as exc:
        layerstack.parse_stack(doc)
    assert exc.value.path.startswith("layers")


def test_composition_out_of_range():
    doc = layerstack.read_device_doc()
    doc["layers"][0]["bragg"]["x_high"] = 1.3
    with pytest.raises(SchemaError) as exc:
        layerstack.parse_stack(doc)
    assert "x_high" in exc.value.path


def test_missing_top_level_section():
    doc = layerstack.read_device_doc()
    del doc["ridge"]
    with pytest.raises(SchemaError):
        layerstack.parse_stack(doc)


def test_quarter_wave_closed_form():
    assert layerstack.quarter_wave_thickness(785.0, 3.0) == pytest.approx(65.41667, abs=1e-5)


def test_quarter_wave_transverse():
    t = layerstack.quarter_wave_thickness(785.0, 3.4, n_eff=3.0)
    assert t == pytest.approx(785.0 / (4 * np.sqrt(3.4**2 - 9.0)))
    with pytest.raises(ValueError):
        layerstack.quarter_wave_thickness(785.0, 3.0, n_eff=3.1)


def test_bragg_six_periods(table):
    layers = layerstack.build_bragg(785.0, 6, 0.8, 0.25, 293.15, table)
    assert len(layers) == 12
    xs = [l.x for l in layers]
    assert xs[0::2] == [0.8] * 6 and xs[1::2] == [0.25] * 6
    n_hi = materials.index(0.8, 785.0, 293.15, table)
    assert layers[0].thickness_nm == pytest.approx(785.0 / (4 * n_hi))


def test_bragg_rejects_zero_periods(table):
    with pytest.raises(ValueError):
        layerstack.build_bragg(785.0, 0, 0.8, 0.25, 293.15, table)


def _mirror_stack(periods, table):
    n_core = materials.index(0.45, 785.0, 293.15, table)
    layers = layerstack.build_bragg(785.0, periods, 0.8, 0.25, 293.15, table, first="low")
    return LayerStack(tuple(layers), substrate_x=0.0, superstrate_index=float(n_core), temperature_K=293.15)


def test_reflectance_rises_with_periods(table):
    R = [modesolver.stack_reflectance(_mirror_stack(p, table), 785.0, table) for p in range(1, 11)]
    assert all(b > a for a, b in zip(R, R[1:]))
    # small index contrast: many periods are needed to approach unity
    assert modesolver.stack_reflectance(_mirror_stack(40, table), 785.0, table) > 0.99


def test_reflectance_matches_rouard(table):
    for p in (1, 3, 6):
        s = _mirror_stack(p, table)
        st_ = modesolver.Structure.from_stack(s, 800.0, table)
        ref = rouard_reflectance(st_.n.real, st_.d, 800.0)
        assert modesolver.stack_reflectance(s, 800.0, table) == pytest.approx(ref, rel=1e-12)
