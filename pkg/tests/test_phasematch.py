import numpy as np
import pytest

from pairforge import materials
from pairforge.modesolver import DispersionCurve
from pairforge.nonlinear import (ModeSet, PhaseMatchError, degeneracy, idler_wavelength, phase_mismatch,
                                 pm_center_vs_temperature, shg_mismatch, tuning_curves)
from pairforge.nonlinear.phasematch import DK_TOL

PUMPS = np.linspace(780.5, 783.5, 13)


@pytest.fixture(scope="module")
def tuning(device_curves):
    return tuning_curves(device_curves, PUMPS)


def _flat_set(n_p, n_s, n_i, T=300.0):
    wp = np.linspace(700.0, 900.0, 41)
    wf = np.linspace(1300.0, 1900.0, 61)
    mk = lambda wl, n, pol, fam: DispersionCurve(pol, fam, 0, wl, np.full(len(wl), n, complex),
                                                 np.full(len(wl), n), T)
    return ModeSet(mk(wp, n_p, "TE", "bragg"), mk(wf, n_s, "TE", "tir"), mk(wf, n_i, "TM", "tir"))


def test_every_point_phase_matched(tuning):
    assert len(tuning.points) > 5
    assert all(abs(p.delta_k) < DK_TOL for p in tuning.points)
    for p in tuning.points:
        assert 1 / p.lambda_p == pytest.approx(1 / p.lambda_s + 1 / p.lambda_i, rel=1e-12)


def test_degenerate_row(tuning):
    d = tuning.degenerate_point
    assert d.lambda_s == pytest.approx(2 * d.lambda_p, rel=1e-12)
    assert d.lambda_i == pytest.approx(2 * d.lambda_p, rel=1e-9)


def test_branches_are_mirror_images(tuning):
    short = {p.lambda_p: p for p in tuning.branch("signal_short")}
    long_ = {p.lambda_p: p for p in tuning.branch("signal_long")}
    common = set(short) & set(long_)
    assert common
    for lp in common:
        # type-II: the two roots are not exactly swapped, but they straddle 2*lambda_p
        assert short[lp].lambda_s < 2 * lp < long_[lp].lambda_s


def test_bracketing_by_dense_scan(device_curves, tuning):
    for p in tuning.branch("signal_short")[:3] + tuning.branch("signal_long")[:3]:
        ls = np.linspace(p.lambda_s - 2.0, p.lambda_s + 2.0, 4001)
        dk = phase_mismatch(device_curves, p.lambda_p, ls)
        s = np.sign(dk)
        flips = ls[:-1][s[:-1] * s[1:] <= 0]
        assert np.min(np.abs(flips - p.lambda_s)) < 2e-3


def test_skipped_pumps_reported(device_curves):
    tc = tuning_curves(device_curves, np.array([778.0, 783.0]))
    # far beyond the degeneracy there are no roots in the search window
    assert 778.0 in tc.skipped or any(p.lambda_p == 778.0 for p in tc.points)


def test_dispersionless_identity():
    ms = _flat_set(3.2, 3.2, 3.2)
    lp = np.linspace(720.0, 880.0, 17)
    assert np.allclose(phase_mismatch(ms, lp, 2 * lp), 0.0, atol=1e-9)
    assert np.allclose(shg_mismatch(ms, 2 * lp), 0.0, atol=1e-9)


def test_no_root_raises():
    # pump index far above the fundamentals: k_p never matches
    ms = _flat_set(3.6, 3.2, 3.2)
    with pytest.raises(PhaseMatchError):
        degeneracy(ms)
    with pytest.raises(PhaseMatchError):
        tuning_curves(ms, [780.0])


def test_out_of_curve_range(device_curves):
    with pytest.raises(materials.DispersionRangeError):
        phase_mismatch(device_curves, 781.0, 1300.0)


def test_wrong_temperature_rejected(device_curves):
    with pytest.raises(ValueError):
        phase_mismatch(device_curves, 781.0, 1562.0, T=300.0)


def test_idler_energy_conservation():
    assert idler_wavelength(785.0, 1570.0) == pytest.approx(1570.0)
    assert idler_wavelength(780.0, 1500.0) == pytest.approx(1 / (1 / 780 - 1 / 1500))


def test_csv(tmp_path, tuning):
    p = tmp_path / "t.csv"
    tuning.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "T_K,lambda_p_nm,lambda_s_nm,lambda_i_nm,delta_k_rad_per_cm,branch"
    assert len(lines) == len(tuning.points) + 1
    assert sum(l.endswith(",degenerate") for l in lines) == 1


def test_temperature_independent_table_gives_zero_slope(device_stack, table):
    doc = table.to_dict()
    doc["coefficients"] = dict(doc["coefficients"], varshni_alpha_eV_per_K=0.0)
    doc["dn_dT_per_K"] = 0.0
    flat = materials.table_from_dict(doc)
    fit = pm_center_vs_temperature(device_stack, [288.15, 300.0, 313.15], table=flat)
    assert abs(fit.slope) < 1e-9


def test_too_few_temperatures(device_stack, table):
    with pytest.raises(PhaseMatchError):
        pm_center_vs_temperature(device_stack, [293.15, 298.15], table=table)
