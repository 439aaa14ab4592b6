"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``) or directly with ``python tests/test_acceptance.py``.
Each criterion also has a wall-clock budget that counts toward passing.
"""
import io
import math
import sys
import time
from contextlib import redirect_stdout
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import fp_contrast, slab_te_tm_root, werner  # noqa: E402
from pairforge import cli, counting, lasermodel, layerstack, materials, modesolver  # noqa: E402
from pairforge.nonlinear import (ShgParams, bandwidth_from_nm, degenerate_wavelength, extract_loss_fp,  # noqa: E402
                                 fit_shg, mode_curves, pm_center_vs_temperature, shg_bandwidth, shg_spectrum,
                                 spdc_pair_probability, synthesize_fp)

_STACK = {}


def _stack():
    if "s" not in _STACK:
        _STACK["t"] = materials.default_table()
        _STACK["s"] = layerstack.load_device(table=_STACK["t"])
    return _STACK["s"], _STACK["t"]


def c1_fidelity():
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["fidelity", "--snr", "13.5"])
    F = float(next(l for l in buf.getvalue().splitlines() if l.startswith("F = ")).split("=")[1])
    ok = code == 0 and abs(F - 0.9032) <= 5e-4 and abs(F - werner(13.5)[1]) < 1e-5
    return ok, f"F = {F:.5f}", 1.0


def c2_degeneracy():
    stack, table = _stack()
    vals = {t: degenerate_wavelength(stack, t + 273.15, table=table) for t in (19.0, 22.0, 25.0)}
    ok = all(abs(v - 1570.0) <= 15.0 for v in vals.values())
    return ok, ", ".join(f"{t:.0f} C: {v:.2f} nm" for t, v in vals.items()), 60.0


def c3_slope():
    stack, table = _stack()
    coarse = pm_center_vs_temperature(stack, np.arange(288.15, 313.16, 5.0), table=table)
    fine = pm_center_vs_temperature(stack, np.arange(288.15, 313.16, 2.5), table=table)
    change = abs(fine.slope - coarse.slope) / abs(coarse.slope)
    ok = 0.04 <= coarse.slope <= 0.12 and 0.04 <= fine.slope <= 0.12 and change < 0.10
    return ok, f"slope {coarse.slope:.4f} nm/K (halved step {fine.slope:.4f}, change {100 * change:.2f} %)", 120.0


def c4_bandwidth():
    stack, table = _stack()
    curves = mode_curves(stack, 293.15, pump_range=(775.0, 795.0), table=table)
    center, fwhm = shg_bandwidth(curves, stack.ridge.length_cm)
    return 0.3 <= fwhm <= 0.9, f"FWHM {fwhm:.4f} nm at {center:.3f} nm (L = {stack.ridge.length_cm} cm)", 60.0


def c5_shg_fit():
    rng = np.random.default_rng(2024)
    fixed = dict(R=(0.27, 0.25, 0.79), alpha_cm1=(2.0, 2.0, 2.0), n_g=(3.23, 3.23, 4.0), length_cm=0.2)
    worst_clean = worst_noisy = 0.0
    for _ in range(20):
        truth = ShgParams(rng.uniform(25.0, 45.0), rng.uniform(1566.0, 1574.0), rng.uniform(0.45, 0.8),
                          phases=tuple(rng.uniform(0.0, np.pi, 3)), **fixed)
        lam = np.arange(truth.center_nm - 2.0, truth.center_nm + 2.0, 0.002)
        y = shg_spectrum(truth, lam)
        for noisy in (False, True):
            data = y + rng.normal(0.0, 0.01 * y.max(), y.shape) if noisy else y
            fit = fit_shg(lam, data, **fixed)
            err = max(abs(fit.eta_pct / truth.eta_pct - 1), abs(fit.center_nm / truth.center_nm - 1),
                      abs(fit.fwhm_nm / truth.fwhm_nm - 1))
            if noisy:
                worst_noisy = max(worst_noisy, err)
            else:
                worst_clean = max(worst_clean, err)
    ok = worst_clean <= 0.02 and worst_noisy <= 0.05
    return ok, f"worst relative error {worst_clean:.2e} noiseless, {worst_noisy:.2e} with 1 % noise", 60.0


def c6_fp_loss():
    lam = np.arange(1565.0, 1567.0, 0.0005)
    worst = 0.0
    for a in sorted(set(np.linspace(0.0, 5.0, 11)) | {0.1, 2.0}):
        res = extract_loss_fp(lam, synthesize_fp(lam, a, 0.27, 0.2), 0.27, 0.2)
        assert abs(np.mean(res.contrasts) - fp_contrast(a, 0.27, 0.2)) < 1e-4
        err = abs(res.alpha_cm1 - a) / a if a > 0 else abs(res.alpha_cm1) / 0.1
        worst = max(worst, err)
    return worst <= 0.01, f"worst relative error {worst:.2e} over alpha in [0, 5] cm^-1", 10.0


def c7_slab_oracle():
    rng = np.random.default_rng(77)
    worst, n = 0.0, 0
    while n < 10:
        n_c = rng.uniform(1.0, 3.3)
        n_s = rng.uniform(3.0, 3.4)
        n_f = max(n_s, n_c) + rng.uniform(0.05, 0.5)
        d, lam = rng.uniform(200.0, 1500.0), rng.uniform(800.0, 1700.0)
        pol = "TE" if rng.random() < 0.5 else "TM"
        ref = slab_te_tm_root(n_f, n_s, n_c, d, lam, pol)
        if ref is None:
            continue
        m = modesolver.select_mode(modesolver.solve_structure([n_s, n_f, n_c], [d], lam, pol), "tir", 0)
        worst = max(worst, abs(m.n_eff.real - ref) if m is not None else math.inf)
        n += 1
    return worst < 1e-6, f"max |n_eff - oracle| = {worst:.2e} over 10 slabs", 10.0


def c8_liv():
    p = lasermodel.DiodeParams.from_dict(layerstack.read_device_doc()["diode"])
    r = lasermodel.liv(p, 0.650)
    w = lasermodel.width_for_density(p.threshold_current_A, 3.30, 2.0)
    J = lasermodel.threshold_current_density(p.threshold_current_A, w, 2.0)
    ok = (round(r.voltage_V, 3) == 3.615 and round(r.output_mW, 1) == 61.4 and round(J, 2) == 3.30
          and abs(w - p.injection_width_um) < 0.01)
    return ok, (f"V = {r.voltage_V:.3f} V, P_out = {r.output_mW:.2f} mW, P_int = {r.internal_mW:.1f} mW, "
                f"J_th = {J:.2f} kA/cm^2 at {w:.3f} um"), 1.0


def c9_coincidences():
    fig4 = counting.load_config(materials.data_path("fig4.json"))
    zs = []
    for seed in range(10):
        cfg = replace(fig4, pairs_per_pulse=0.0, seed=seed)
        h = counting.simulate_coincidences(cfg, threads=4)
        sel = np.abs(h.centers_s) <= 20e-9
        exp = sum(counting.expected_accidentals_per_bin(cfg, t) for t in h.centers_s[sel])
        zs.append((h.counts[sel].sum() - exp) / math.sqrt(exp))
    snrs = [counting.analyze_histogram(counting.simulate_coincidences(replace(fig4, seed=s), threads=4)).snr
            for s in range(10)]
    ok = max(abs(z) for z in zs) < 3 and all(abs(s - 13.5) <= 2 for s in snrs)
    return ok, (f"noise-only max |z| = {max(abs(z) for z in zs):.2f}; "
                f"fixture SNR {min(snrs):.2f}..{max(snrs):.2f} (mean {np.mean(snrs):.2f})"), 120.0


def c10_efficiency():
    probs = [spdc_pair_probability(35.0, 0.2, 785.0, bandwidth_from_nm(d, 1570.0)) for d in np.linspace(5, 20, 16)]
    p = lasermodel.DiodeParams.from_dict(layerstack.read_device_doc()["diode"])
    ppe = lasermodel.pairs_per_electron(p, 0.65, 1e-9, 785.0).pairs_per_electron
    facet = lasermodel.pairs_per_electron(p, 0.65, 1e-9, 785.0, slope_reference="facet").pairs_per_electron
    ok = 1e-9 <= min(probs) and max(probs) <= 1e-8 and 7e-11 / 3 <= ppe <= 7e-11 * 3
    return ok, (f"pairs/photon {min(probs):.2e}..{max(probs):.2e}; pairs/electron {ppe:.2e} "
                f"(facet-slope reading {facet:.2e})"), 1.0


def c11_determinism(tmp):
    outs = []
    for i, threads in enumerate(("1", "4", "4")):
        path = Path(tmp) / f"h{i}.csv"
        with redirect_stdout(io.StringIO()):
            assert cli.main(["coincide", "--seed", "7", "--threads", threads, "--out", str(path)]) == 0
        outs.append(path.read_bytes() + counting.sidecar_path(path).read_bytes())
    ok = outs[0] == outs[1] == outs[2]
    return ok, f"coincide --seed 7: {len(outs[0])} bytes, identical for --threads 1/4/4", 60.0


CRITERIA = [
    (1, "Werner fidelity", c1_fidelity),
    (2, "phase-matching degeneracy", c2_degeneracy),
    (3, "temperature slope", c3_slope),
    (4, "SHG bandwidth", c4_bandwidth),
    (5, "SHG fit round trip", c5_shg_fit),
    (6, "Fabry-Perot loss extraction", c6_fp_loss),
    (7, "mode-solver oracle", c7_slab_oracle),
    (8, "L-I-V", c8_liv),
    (9, "coincidence statistics", c9_coincidences),
    (10, "efficiency chain", c10_efficiency),
    (11, "determinism", c11_determinism),
]


def evaluate(num, name, fn, tmp=None):
    t0 = time.perf_counter()
    try:
        ok, detail, budget = fn(tmp) if fn is c11_determinism else fn()
        err = None
    except Exception as exc:  # a crash is a failure, reported on the same line
        ok, detail, budget, err = False, f"{type(exc).__name__}: {exc}", math.inf, exc
    dt = time.perf_counter() - t0
    in_time = dt <= budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] criterion {num:2d} {name}: {detail} ({dt:.2f} s, budget {budget:g} s)"
    return status == "PASS", line, err


@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn, tmp_path, capsys):
    passed, line, err = evaluate(num, name, fn, tmp_path)
    with capsys.disabled():
        print("\n" + line)
    if err is not None:
        raise err
    assert passed, line


if __name__ == "__main__":
    import tempfile

    results = []
    with tempfile.TemporaryDirectory() as tmp:
        for num, name, fn in CRITERIA:
            passed, line, _ = evaluate(num, name, fn, tmp)
            print(line, flush=True)
            results.append(passed)
    print(f"{sum(results)}/{len(results)} criteria passed")
    sys.exit(0 if all(results) else 1)
