"""Type-II SHG spectra in a Fabry-Perot waveguide, and their least-squares fit.

Model (fundamental wavelength ``lam``)::

    P_SH = eta/100 * L**2 * P**2 * sinc(u)**2 * A_te * A_tm * A_teb
    A_m  = 1 / (1 + rho_m**2 - 2 rho_m cos(2 phi_m)),   rho_m = R_m exp(-alpha_m L)

``sinc(u) = sin(u)/u`` with ``u = Delta k L / 2``.  With a parametric
envelope ``u = SINC_HALF * 2 (lam - center) / fwhm``.  The round-trip
phase of mode m is ``phi_m = phi0_m + 2 pi n_g,m L (1/lam_m - 1/lam_m,c)``
where ``lam_m`` is ``lam`` for TE/TM and ``lam/2`` for the TEB pump.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from itertools import product

import numpy as np
from scipy import optimize

from . import phasematch

SINC_HALF = 1.391557377  # sinc(u)**2 = 1/2
MODES = ("te", "tm", "teb")
_HARMONIC = np.array([1.0, 1.0, 2.0])


class ShgFitError(RuntimeError):
    def __init__(self, message, residual_norm=None):
        super().__init__(message if residual_norm is None else f"{message} (residual norm {residual_norm:.3e})")
        self.residual_norm = residual_norm


@dataclass(frozen=True)
class ShgParams:
    eta_pct: float = 35.0  # %/(W cm^2)
    center_nm: float = 1570.0  # fundamental wavelength of the phase-matching peak
    fwhm_nm: float = 0.6
    length_cm: float = 0.2
    power_W: float = 1.0
    R: tuple = (0.27, 0.25, 0.79)  # TE00, TM00, TEB
    alpha_cm1: tuple = (2.0, 2.0, 2.0)
    n_g: tuple = (3.23, 3.23, 4.0)
    phases: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        for r in self.R:
            if not 0.0 <= r < 1.0:
                raise ValueError(f"facet reflectivity must lie in [0, 1), got {r}")
        if any(a < 0 for a in self.alpha_cm1):
            raise ValueError("propagation losses must be non-negative")
        if self.eta_pct < 0 or self.fwhm_nm <= 0 or self.length_cm <= 0 or self.power_W < 0:
            raise ValueError("eta >= 0, fwhm > 0, length > 0 and power >= 0 are required")


@dataclass(frozen=True)
class ShgFit:
    eta_pct: float
    center_nm: float
    fwhm_nm: float
    phases: tuple
    R: tuple
    alpha_cm1: tuple
    n_g: tuple
    length_cm: float
    power_W: float
    residual_norm: float
    degenerate: bool = False
    nfev: int = 0

    def params(self):
        return ShgParams(self.eta_pct, self.center_nm, self.fwhm_nm, self.length_cm, self.power_W,
                         self.R, self.alpha_cm1, self.n_g, self.phases)

    def to_json(self, path=None):
        text = json.dumps(_jsonable(asdict(self)), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def sinc2(u):
    return np.sinc(np.asarray(u) / np.pi) ** 2


def airy_factor(R, alpha_cm1, length_cm, phase):
    """Standing-wave cavity enhancement; equals 1 for a facet-less guide."""
    rho = R * np.exp(-alpha_cm1 * length_cm)
    return 1.0 / (1.0 + rho**2 - 2.0 * rho * np.cos(2.0 * phase))


def round_trip_phases(wavelengths, center, n_g, length_cm, phases):
    """phi_m(lam) for the three modes, shape (3, len(lam))."""
    lam = np.asarray(wavelengths, dtype=float)[None, :]
    h = _HARMONIC[:, None]
    ng = np.asarray(n_g, dtype=float)[:, None]
    return np.asarray(phases, dtype=float)[:, None] + 2 * np.pi * ng * length_cm * 1e7 * h * (1 / lam - 1 / center)


def cavity_product(wavelengths, params: ShgParams, center=None):
    phi = round_trip_phases(wavelengths, params.center_nm if center is None else center,
                            params.n_g, params.length_cm, params.phases)
    out = np.ones(phi.shape[1])
    for m in range(3):
        out = out * airy_factor(params.R[m], params.alpha_cm1[m], params.length_cm, phi[m])
    return out


def shg_spectrum(params: ShgParams, wavelengths, curves: phasematch.ModeSet | None = None):
    """SH power [W] on a grid of fundamental wavelengths [nm].

    With ``curves`` the envelope uses the modal phase mismatch of the three
    dispersion curves and the cavity phases use their effective indices;
    ``center_nm``/``fwhm_nm`` of ``params`` are then ignored.
    """
    lam = np.asarray(wavelengths, dtype=float)
    scale = params.eta_pct / 100.0 * params.length_cm**2 * params.power_W**2
    if curves is None:
        u = SINC_HALF * 2.0 * (lam - params.center_nm) / params.fwhm_nm
        return scale * sinc2(u) * cavity_product(lam, params)
    u = phasematch.shg_mismatch(curves, lam) * params.length_cm / 2.0
    n = [curves.signal.neff_at(lam), curves.idler.neff_at(lam), curves.pump.neff_at(lam / 2)]
    cav = np.ones_like(lam)
    for m in range(3):
        phi = params.phases[m] + 2 * np.pi * np.real(n[m]) * params.length_cm * 1e7 * _HARMONIC[m] / lam
        cav = cav * airy_factor(params.R[m], params.alpha_cm1[m], params.length_cm, phi)
    return scale * sinc2(u) * cav


def shg_bandwidth(curves: phasematch.ModeSet, length_cm):
    """(center, FWHM) [nm] of the sinc^2 envelope from the modal mismatch."""
    f = lambda lam: phasematch.shg_mismatch(curves, lam)
    center = 2 * phasematch.degeneracy(curves)
    target = 2 * SINC_HALF / length_cm
    lo, hi = curves.fundamental_range
    edges = []
    for sign, bound in ((-1, lo), (1, hi)):
        step, x = 0.05, center
        while True:
            x_next = x + sign * step
            if (x_next - bound) * sign > 0:
                raise phasematch.PhaseMatchError("SHG half-maximum lies outside the dispersion curves")
            if abs(f(x_next)) >= target:
                break
            x, step = x_next, step * 1.5
        edges.append(optimize.brentq(lambda l: abs(f(l)) - target, min(x, x_next), max(x, x_next), xtol=1e-10))
    return center, edges[1] - edges[0]


def measured_fwhm(wavelengths, power):
    """FWHM of a sampled single-peaked curve by linear interpolation of the half-maximum crossings."""
    lam = np.asarray(wavelengths, dtype=float)
    p = np.asarray(power, dtype=float)
    i = int(np.argmax(p))
    half = p[i] / 2
    left = i
    while left > 0 and p[left] > half:
        left -= 1
    right = i
    while right < len(p) - 1 and p[right] > half:
        right += 1
    if p[left] > half or p[right] > half:
        raise ValueError("peak not bracketed by half-maximum crossings")
    xl = np.interp(half, [p[left], p[left + 1]], [lam[left], lam[left + 1]])
    xr = np.interp(half, [p[right], p[right - 1]], [lam[right], lam[right - 1]])
    return xr - xl


def fringe_period(wavelength, n_g, length_cm, harmonic=1):
    """FP fringe period [nm] in fundamental wavelength for a mode at lam/harmonic."""
    return wavelength**2 / (2 * harmonic * n_g * length_cm * 1e7)


# -- fitting -------------------------------------------------------------------

def _smooth(y, width):
    if width < 2:
        return y
    k = np.ones(width) / width
    return np.convolve(y, k, mode="same")


def _initial_envelope(lam, p, period):
    dl = np.median(np.diff(lam))
    sm = _smooth(p, max(int(round(2 * period / dl)), 1))
    i = int(np.argmax(sm))
    center = lam[i]
    try:
        fwhm = measured_fwhm(lam, sm)
    except ValueError:
        fwhm = (lam[-1] - lam[0]) / 4
    return center, max(fwhm, 4 * dl)


def _model_shape(theta, lam, fixed):
    center, fwhm = theta[0], theta[1]
    params = replace(fixed, eta_pct=100.0, center_nm=center, fwhm_nm=abs(fwhm), phases=tuple(theta[2:5]), power_W=1.0)
    return shg_spectrum(params, lam) / params.length_cm**2  # envelope x cavity, unit amplitude


def _best_eta(shape, p):
    den = float(np.dot(shape, shape))
    return max(float(np.dot(shape, p)) / den, 0.0) if den > 0 else 0.0


def fit_shg(wavelengths, power, *, R, alpha_cm1, n_g, length_cm, power_W=1.0,
            phase_grid=6, starts=6, max_nfev=2000, rtol=0.05):
    """Least-squares estimate of (eta, center, FWHM) plus the three cavity phases.

    Facet reflectivities, losses, group indices and length are held fixed.
    ``eta`` enters linearly and is projected out at every step.
    """
    lam = np.asarray(wavelengths, dtype=float)
    p = np.asarray(power, dtype=float)
    if lam.ndim != 1 or lam.shape != p.shape or len(lam) < 16:
        raise ValueError("need matching 1-D wavelength and power arrays with at least 16 samples")
    if np.any(np.diff(lam) <= 0):
        raise ValueError("wavelength grid must be strictly increasing")
    fixed = ShgParams(35.0, float(lam.mean()), 1.0, length_cm, 1.0, tuple(R), tuple(alpha_cm1), tuple(n_g))
    common = dict(R=tuple(R), alpha_cm1=tuple(alpha_cm1), n_g=tuple(n_g), length_cm=length_cm, power_W=power_W)
    if not np.any(p > 0):
        return ShgFit(0.0, float("nan"), float("nan"), (0.0, 0.0, 0.0), residual_norm=0.0, degenerate=True, **common)

    mid = float(lam.mean())
    period = fringe_period(mid, max(n_g[0], n_g[1]), length_cm)
    if lam[-1] - lam[0] < 3 * period:
        raise ValueError(f"spectrum spans {lam[-1] - lam[0]:.3f} nm, fewer than 3 FP fringes ({period:.3f} nm each)")

    norm = float(np.max(np.abs(p)))
    y = p / norm
    c0, w0 = _initial_envelope(lam, y, period)

    def resid(theta):
        s = _model_shape(theta, lam, fixed)
        return _best_eta(s, y) * s - y

    grid = np.arange(phase_grid) * np.pi / phase_grid
    scored = []
    for ph in product(grid, repeat=3):
        theta = np.array([c0, w0, *ph])
        scored.append((float(np.sum(resid(theta) ** 2)), theta))
    scored.sort(key=lambda t: t[0])

    best, nfev = None, 0
    span = lam[-1] - lam[0]
    lower = [lam[0], 1e-3 * span, -np.inf, -np.inf, -np.inf]
    upper = [lam[-1], 2 * span, np.inf, np.inf, np.inf]
    for _, theta in scored[:starts]:
        res = optimize.least_squares(resid, theta, bounds=(lower, upper), x_scale=[w0, w0, 1, 1, 1],
                                     max_nfev=max_nfev, xtol=1e-12, ftol=1e-12)
        nfev += res.nfev
        if best is None or res.cost < best.cost:
            best = res
    theta = best.x
    shape = _model_shape(theta, lam, fixed)
    eta = _best_eta(shape, y) * norm / (power_W**2 * length_cm**2) * 100.0
    rnorm = float(np.linalg.norm(resid(theta)) / np.sqrt(len(y)))
    if not best.success or not np.isfinite(rnorm) or rnorm > rtol:
        raise ShgFitError(f"SHG fit did not converge after {nfev} evaluations", rnorm)
    phases = tuple(float(np.mod(t, np.pi)) for t in theta[2:5])
    return ShgFit(float(eta), float(theta[0]), float(abs(theta[1])), phases,
                  residual_norm=rnorm, nfev=int(nfev), **common)


def read_spectrum_csv(path):
    """Two-column CSV (lambda_nm, intensity) with a header row."""
    data = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    cols = data.dtype.names
    if len(cols) < 2:
        raise ValueError(f"{path}: expected two columns (lambda_nm, intensity)")
    return np.asarray(data[cols[0]]), np.asarray(data[cols[1]])


def write_spectrum_csv(path, wavelengths, power, normalize=True):
    power = np.asarray(power, dtype=float)
    peak = power.max() if normalize and power.max() > 0 else 1.0
    with open(path, "w") as fh:
        fh.write("lambda_nm,P_sh_norm,P_sh_W\n")
        for l, p in zip(wavelengths, power):
            fh.write(f"{l:.6f},{p / peak:.9e},{p:.9e}\n")
