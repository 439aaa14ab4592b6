"""Type-II modal phase matching: TEB pump -> TE00 signal + TM00 idler."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from .. import modesolver
from ..materials import DispersionRangeError

PUMP = ("TE", "bragg", 0)
SIGNAL = ("TE", "tir", 0)
IDLER = ("TM", "tir", 0)
DK_TOL = 1e-4  # rad/cm
SEARCH_HALF_WIDTH = 200.0  # nm around 2*lambda_p


class PhaseMatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhaseMatchPoint:
    lambda_p: float
    lambda_s: float
    lambda_i: float
    temperature: float
    delta_k: float
    branch: str = ""


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Dispersion curves of the three interacting modes."""

    pump: modesolver.DispersionCurve
    signal: modesolver.DispersionCurve
    idler: modesolver.DispersionCurve

    @property
    def temperature(self):
        return self.pump.temperature

    @property
    def pump_range(self):
        return self.pump.wavelength[0], self.pump.wavelength[-1]

    @property
    def fundamental_range(self):
        return (max(self.signal.wavelength[0], self.idler.wavelength[0]),
                min(self.signal.wavelength[-1], self.idler.wavelength[-1]))


def mode_curves(stack, T=None, pump_range=(770.0, 800.0), fundamental_range=None, *,
                pump_step=1.0, fundamental_step=5.0, table=None, selectors=(PUMP, SIGNAL, IDLER)):
    """Compute the pump, signal and idler dispersion curves of a stack.

    The fundamental grid defaults to twice the pump range.
    """
    if fundamental_range is None:
        fundamental_range = (2 * pump_range[0], 2 * pump_range[1])
    pg = _grid(*pump_range, pump_step)
    fg = _grid(*fundamental_range, fundamental_step)
    (pp, pf, po), (sp, sf, so), (ip, i_f, io) = selectors
    return ModeSet(
        modesolver.dispersion_curve(stack, pp, pf, po, pg, T, table),
        modesolver.dispersion_curve(stack, sp, sf, so, fg, T, table),
        modesolver.dispersion_curve(stack, ip, i_f, io, fg, T, table),
    )


def _grid(lo, hi, step):
    n = max(int(np.ceil((hi - lo) / step)), 3)
    return np.linspace(lo, hi, n + 1)


def idler_wavelength(lambda_p, lambda_s):
    return 1.0 / (1.0 / lambda_p - 1.0 / lambda_s)


def phase_mismatch(curves: ModeSet, lambda_p, lambda_s, T=None):
    """k_p - k_s - k_i [rad/cm] with the idler fixed by energy conservation."""
    if T is not None and abs(T - curves.temperature) > 1e-9:
        raise ValueError(f"curves were computed at {curves.temperature} K, not {T} K")
    lambda_p = np.asarray(lambda_p, dtype=float)
    lambda_s = np.asarray(lambda_s, dtype=float)
    lambda_i = idler_wavelength(lambda_p, lambda_s)
    n_p = curves.pump.neff_at(lambda_p)
    n_s = curves.signal.neff_at(lambda_s)
    n_i = curves.idler.neff_at(lambda_i)
    dk = 2 * np.pi * (n_p / lambda_p - n_s / lambda_s - n_i / lambda_i) * 1e7
    return dk if np.ndim(dk) else float(dk)


def shg_mismatch(curves: ModeSet, lambda_f):
    """Phase mismatch of degenerate type-II SHG at fundamental wavelength `lambda_f`."""
    return phase_mismatch(curves, np.asarray(lambda_f) / 2.0, lambda_f)


def degeneracy(curves: ModeSet):
    """Pump wavelength [nm] where signal and idler coincide at 2*lambda_p."""
    lo = max(curves.pump_range[0], curves.fundamental_range[0] / 2)
    hi = min(curves.pump_range[1], curves.fundamental_range[1] / 2)
    f = lambda lp: phase_mismatch(curves, lp, 2 * lp)
    grid = np.linspace(lo, hi, 201)
    vals = f(grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if not len(idx):
        raise PhaseMatchError(
            f"no degenerate phase matching for pump in [{lo:.2f}, {hi:.2f}] nm at T={curves.temperature:.2f} K")
    i = idx[np.argmin(np.abs(grid[idx] - 0.5 * (lo + hi)))]
    return optimize.brentq(f, grid[i], grid[i + 1], xtol=1e-12, rtol=1e-15)


@dataclass(frozen=True, eq=False)
class TuningCurve:
    temperature: float
    points: tuple
    degeneracy_pump: float
    skipped: tuple = field(default=())

    def branch(self, name):
        return [p for p in self.points if p.branch == name]

    @property
    def degenerate_point(self):
        return next(p for p in self.points if p.branch == "degenerate")

    def as_array(self):
        return np.array([[p.lambda_p, p.lambda_s, p.lambda_i] for p in self.points])

    def csv_text(self):
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["T_K", "lambda_p_nm", "lambda_s_nm", "lambda_i_nm", "delta_k_rad_per_cm", "branch"])
        for p in self.points:
            wr.writerow([f"{p.temperature:.6f}", f"{p.lambda_p:.9f}", f"{p.lambda_s:.9f}",
                         f"{p.lambda_i:.9f}", f"{p.delta_k:.3e}", p.branch])
        return buf.getvalue()

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())


def _signal_roots(curves, lp, half_width, step):
    flo, fhi = curves.fundamental_range
    # the idler must stay inside the curve as well
    s_lo = max(2 * lp - half_width, flo, idler_wavelength(lp, fhi) if fhi > lp else flo)
    s_hi = min(2 * lp + half_width, fhi, idler_wavelength(lp, flo) if flo > lp else fhi)
    if s_hi <= s_lo:
        return []
    grid = np.linspace(s_lo, s_hi, max(int((s_hi - s_lo) / step), 8) + 1)
    vals = phase_mismatch(curves, lp, grid)
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(optimize.brentq(lambda ls: phase_mismatch(curves, lp, ls), grid[i], grid[i + 1],
                                     xtol=1e-11, rtol=1e-15))
    return roots


def tuning_curves(curves: ModeSet, pump_wavelengths=None, *, half_width=SEARCH_HALF_WIDTH, scan_step=0.5):
    """Solve energy conservation and Delta k = 0 for every pump wavelength.

    Each pump wavelength may give two signal solutions (the two branches of
    the curve); the degenerate point is emitted once.  Pump wavelengths
    without a root in the search window are reported in `skipped`.
    """
    T = curves.temperature
    if pump_wavelengths is None:
        pump_wavelengths = np.linspace(*curves.pump_range, 101)
    lp_deg = degeneracy(curves)
    points, skipped = [], []
    for lp in np.asarray(pump_wavelengths, dtype=float):
        roots = _signal_roots(curves, lp, half_width, scan_step)
        if not roots:
            skipped.append(float(lp))
            continue
        for ls in roots:
            li = idler_wavelength(lp, ls)
            if abs(ls - li) < 1e-6:
                continue
            points.append(PhaseMatchPoint(float(lp), float(ls), float(li), T,
                                          phase_mismatch(curves, lp, ls), "signal_short" if ls < li else "signal_long"))
    points.append(PhaseMatchPoint(lp_deg, 2 * lp_deg, idler_wavelength(lp_deg, 2 * lp_deg), T,
                                  phase_mismatch(curves, lp_deg, 2 * lp_deg), "degenerate"))
    points.sort(key=lambda p: (p.lambda_p, p.lambda_s))
    if len(points) <= 1 and not len(pump_wavelengths) == 0 and len(skipped) == len(pump_wavelengths):
        raise PhaseMatchError(f"no phase-matched points at T={T:.2f} K")
    bad = [p for p in points if abs(p.delta_k) >= DK_TOL]
    if bad:
        raise PhaseMatchError(f"{len(bad)} tuning points failed the |dk| < {DK_TOL} rad/cm check")
    return TuningCurve(T, tuple(points), lp_deg, tuple(skipped))


def degenerate_wavelength(stack, T, window=(770.0, 800.0), **kw):
    """Degenerate pair wavelength 2*lambda_p [nm] at temperature T."""
    curves = mode_curves(stack, T, pump_range=window, pump_step=kw.get("pump_step", 2.5),
                         fundamental_step=kw.get("fundamental_step", 5.0), table=kw.get("table"))
    return 2 * degeneracy(curves)


@dataclass(frozen=True)
class TemperatureSlope:
    slope: float  # nm/K, SH (pump) wavelength
    intercept: float  # nm at 0 K
    temperatures: tuple
    centers: tuple  # SH peak wavelength = degenerate pump wavelength [nm]

    def center_at(self, T):
        return self.intercept + self.slope * T


def pm_center_vs_temperature(stack, temperatures, window=(770.0, 800.0), **kw):
    """Linear fit of the degenerate SH peak wavelength against temperature."""
    temps, centers = [], []
    for T in np.asarray(temperatures, dtype=float):
        try:
            centers.append(degenerate_wavelength(stack, T, window, **kw) / 2)
            temps.append(float(T))
        except (PhaseMatchError, DispersionRangeError, modesolver.ModeTrackingError):
            continue
    if len(temps) < 3:
        raise PhaseMatchError(f"only {len(temps)} temperatures gave a phase-matching point; need 3")
    fit = stats.linregress(temps, centers)
    return TemperatureSlope(float(fit.slope), float(fit.intercept), tuple(temps), tuple(centers))
