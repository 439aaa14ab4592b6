"""Calibration walk-through for the packaged device and counting fixture.

Run with ``python3 notebooks/00_calibration.py``.  Everything prints as text.
"""
import copy

import numpy as np

from pairforge import counting, layerstack, materials, modesolver
from pairforge.nonlinear import degenerate_wavelength

table = materials.default_table()
doc = layerstack.read_device_doc()

# %% Mirror layers: a normal-incidence quarter wave vs. the thicknesses we ship
print("== mirror thickness scan ==")
for x in (0.80, 0.25):
    n = materials.index(x, 785.0, 293.15, table)
    print(f"x = {x:.2f}: n(785 nm) = {n:.4f}, lambda/4n = {layerstack.quarter_wave_thickness(785.0, n):.2f} nm")


def with_mirrors(t_high, t_low):
    d = copy.deepcopy(doc)
    for entry in d["layers"]:
        if "bragg" in entry:
            entry["bragg"]["thickness_high_nm"] = t_high
            entry["bragg"]["thickness_low_nm"] = t_low
    return layerstack.parse_stack(d, table)


for th, tl in ((64.35, 57.95), (240.0, 240.0), (250.0, 250.0), (260.0, 260.0)):
    try:
        lam = degenerate_wavelength(with_mirrors(th, tl), 293.15, table=table)
        print(f"mirrors {th:.0f}/{tl:.0f} nm -> degeneracy {lam:.2f} nm at 20 C")
    except modesolver.ModeTrackingError as exc:
        print(f"mirrors {th:.0f}/{tl:.0f} nm -> no Bragg mode ({exc})")

# %% Free-carrier cross-section: what the loss table gives for the shipped sigma
print("\n== loss model ==")
loss = doc["loss"]
for dop in (1e17, 1e18, 2e18, 2e19):
    m = materials.LossModel(dop, loss["alpha_undoped_cm1"], loss["cross_section_cm2"],
                            loss["reference_wavelength_nm"])
    print(f"doping {dop:.0e} cm^-3: alpha(1570) = {materials.layer_loss(m, 1570.0):.3f} cm^-1, "
          f"alpha(785) = {materials.layer_loss(m, 785.0):.3f} cm^-1")

# %% Counting fixture: SNR against the noise level, averaged over a few seeds
print("\n== counting fixture ==")
fig4 = counting.load_config(materials.data_path("fig4.json"))
print(f"pairs/pulse {fig4.pairs_per_pulse:.3f}, noise {fig4.noise_per_pulse}, transmission {fig4.transmission}")


def mean_snr(noise, seeds=range(3)):
    cfg = [counting.ExperimentConfig.from_dict({**fig4.to_dict(), "noise_per_pulse": [noise, noise], "seed": s})
           for s in seeds]
    return float(np.mean([counting.analyze_histogram(counting.simulate_coincidences(c, threads=4)).snr
                          for c in cfg]))


for noise in (5.0, 7.0, 9.0):
    print(f"noise {noise:.1f} photons/pulse -> mean SNR {mean_snr(noise):.2f}")
