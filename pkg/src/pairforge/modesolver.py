"""1-D transfer-matrix mode solver for planar multilayer waveguides.

The stack is substrate (semi-infinite, below z=0), finite layers, and a
semi-infinite superstrate.  A mode with effective index N satisfies
F(N) = 0 where F is the mismatch between the field propagated up from an
outgoing/decaying substrate solution and the decaying superstrate solution.
Modes leaking into a higher-index substrate come out with Im(N) > 0.

Depths are in nm, wavelengths in nm; the field is carried internally as
(U, dU/dz / (k0 p)) with p = 1 for TE and p = n**2 for TM.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.integrate import trapezoid

from . import materials
from .layerstack import LayerStack
from .units import alpha_from_imag_index

SCAN_STEP = 2e-4
GRID_STEP_NM = 5.0
GRID_PAD_NM = 1000.0
MAX_IMAG = 1e-3
BRAGG_CORE_CONFINEMENT = 0.15
RESIDUAL_TOL = 1e-10

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


@dataclass(frozen=True)
class Structure:
    """Resolved complex indices and thicknesses of a stack at one wavelength."""

    n: np.ndarray  # substrate, layers..., superstrate
    d: np.ndarray  # finite layer thicknesses [nm]
    wavelength: float
    core: np.ndarray = None  # bool mask over finite layers
    clad: np.ndarray = None

    @classmethod
    def from_stack(cls, stack: LayerStack, wavelength, table=None, lossy=False):
        n = stack.indices(wavelength, table, lossy=lossy)
        d = np.array([layer.thickness_nm for layer in stack.layers], dtype=float)
        return cls(n=n, d=d, wavelength=float(wavelength), core=stack.core_mask, clad=stack.clad_mask)

    @property
    def k0(self):
        return 2 * np.pi / self.wavelength

    @property
    def interfaces(self):
        return np.concatenate([[0.0], np.cumsum(self.d)])

    @property
    def cladding_index(self):
        """RMS index of the cladding layers, the threshold between TIR and Bragg families."""
        if self.clad is not None and self.clad.any():
            clad = self.clad
        elif self.core is not None and self.core.any() and not self.core.all():
            clad = ~self.core
        else:
            # plain slab: the outer media are the cladding
            return float(max(self.n[0].real, self.n[-1].real))
        n_fin = self.n[1:-1].real
        w = self.d[clad]
        return float(np.sqrt(np.sum(w * n_fin[clad] ** 2) / np.sum(w)))


@dataclass(frozen=True, eq=False)
class GuidedMode:
    polarization: str
    family: str  # "tir" or "bragg"
    order: int
    n_eff: complex
    wavelength: float
    z: np.ndarray = field(repr=False)  # nm, uniform
    field: np.ndarray = field(repr=False)  # transverse E-field, int |E|^2 dz = 1 on the grid
    confinement: float = 0.0
    n_g: float = float("nan")
    residual: float = 0.0

    @property
    def alpha(self):
        """Modal intensity loss [cm^-1]."""
        return float(alpha_from_imag_index(self.n_eff.imag, self.wavelength))

    @property
    def peak_depth(self):
        return float(self.z[np.argmax(np.abs(self.field))])


# -- dispersion function -----------------------------------------------------

def _outer_q(n, N):
    """Transverse index sqrt(n^2 - N^2) on the outgoing / decaying branch."""
    arg = n**2 - N**2
    return np.where(np.real(arg) > 0, np.sqrt(arg + 0j), 1j * np.sqrt(-arg + 0j))


def _p(n, pol):
    return np.ones_like(n) if pol == "TE" else n**2


def _propagate(s: Structure, N, pol, keep=False):
    N = np.asarray(N, dtype=complex)
    k0 = s.k0
    q_s = _outer_q(s.n[0], N)
    q_c = _outer_q(s.n[-1], N)
    w = 1j * q_c / _p(s.n[-1], pol)
    aw = np.abs(w)
    U = np.ones_like(N)
    V = -1j * q_s / _p(s.n[0], pol)
    # round-off in F scales with the largest intermediate amplitude
    scale = np.abs(V) + aw * np.abs(U)
    states = [(U, V)]
    for nj, dj in zip(s.n[1:-1], s.d):
        q = np.sqrt(nj**2 - N**2 + 0j)
        phi = q * k0 * dj
        c, sn = np.cos(phi), np.sin(phi)
        pj = nj**2 if pol == "TM" else 1.0
        small = np.abs(q) < 1e-12
        sinc_q = np.where(small, k0 * dj, sn / np.where(small, 1.0, q))
        U, V = c * U + pj * sinc_q * V, -q * sn / pj * U + c * V
        scale = np.maximum(scale, np.abs(V) + aw * np.abs(U))
        if keep:
            states.append((U, V))
    F = V - w * U
    return (F, scale, states) if keep else (F, scale)


def dispersion_function(s: Structure, N, pol="TE", normalized=False):
    F, scale = _propagate(s, N, pol)
    return F / scale if normalized else F


def normal_reflectance(n, d, wavelength, from_top=True):
    """Power reflectance at normal incidence of (substrate, layers..., superstrate).

    Light arrives from the superstrate by default; ``from_top=False`` makes
    the substrate the incident medium.
    """
    n = np.asarray(n, dtype=complex)
    d = np.asarray(d, dtype=float)
    if not from_top:
        n, d = n[::-1], d[::-1]
    k0 = 2 * np.pi / wavelength
    B, C = 1.0 + 0j, n[0]
    # characteristic matrices applied from the exit medium upward
    for nj, dj in zip(n[1:-1], d):
        delta = k0 * nj * dj
        B, C = np.cos(delta) * B + 1j * np.sin(delta) / nj * C, 1j * nj * np.sin(delta) * B + np.cos(delta) * C
    Y = C / B
    r = (n[-1] - Y) / (n[-1] + Y)
    return float(abs(r) ** 2)


def stack_reflectance(stack: LayerStack, wavelength, table=None, from_top=True):
    s = Structure.from_stack(stack, wavelength, table)
    return normal_reflectance(s.n, s.d, wavelength, from_top)


# -- root search -------------------------------------------------------------

def _secant(s, pol, x0, x1, iters=60):
    """Complex secant iteration run on many starting pairs at once."""
    x0 = np.asarray(x0, dtype=complex).copy()
    x1 = np.asarray(x1, dtype=complex).copy()
    f0 = _propagate(s, x0, pol)[0]
    f1 = _propagate(s, x1, pol)[0]
    for _ in range(iters):
        den = f1 - f0
        ok = (den != 0) & np.isfinite(den) & (x1 != x0)
        if not ok.any():
            break
        x2 = np.where(ok, x1 - f1 * (x1 - x0) / np.where(ok, den, 1.0), x1)
        x0, f0 = x1, f1
        x1 = x2
        with np.errstate(all="ignore"):
            f1 = _propagate(s, x1, pol)[0]
        if np.all(np.abs(x1 - x0) < 1e-15 * np.maximum(np.abs(x1), 1.0)):
            break
    F, scale = _propagate(s, x1, pol)
    with np.errstate(all="ignore"):
        res = np.abs(F) / scale
    return x1, res


def _polish(s, pol, N0, N1=None, dN=1e-7):
    N0 = complex(N0)
    x, res = _secant(s, pol, [N0], [N0 - dN if N1 is None else complex(N1)])
    if not np.isfinite(x[0]) or not res[0] <= RESIDUAL_TOL:
        return None
    return complex(x[0]), float(res[0])


def _roots(s, pol, n_lo, n_hi, step, max_imag):
    grid = np.arange(n_hi, n_lo, -step)
    g = dispersion_function(s, grid, pol, normalized=True)
    # A root close to the real axis flips the phase of F by ~pi between two
    # grid points (a plain sign change when F is real); broader leaky roots
    # show up as minima of |F|.
    jump = np.abs(np.angle(g[1:] / g[:-1]))
    idx = np.nonzero(jump > 1.0)[0]
    t = np.abs(g[idx]) / (np.abs(g[idx]) + np.abs(g[idx + 1]))
    starts = list(zip(grid[idx] - t * step, grid[idx] - t * step - 1e-7))
    a = np.abs(g)
    mins = np.nonzero((a[1:-1] < a[:-2]) & (a[1:-1] <= a[2:]))[0] + 1
    starts += [(grid[i], grid[i] - 0.5 * step) for i in mins]
    if not starts:
        return []
    x0, x1 = map(np.array, zip(*starts))
    with np.errstate(all="ignore"):
        r, res = _secant(s, pol, x0, x1)
    roots = []
    for N, e in sorted(zip(r, res), key=lambda t: -np.real(t[0]) if np.isfinite(t[0]) else np.inf):
        if not np.isfinite(N) or not e <= RESIDUAL_TOL:
            continue
        if not (n_lo <= N.real <= n_hi) or N.imag < -1e-12 or N.imag > max_imag:
            continue
        if abs(N.imag) < 1e-13:
            N = complex(N.real, 0.0)
        if any(abs(N - q) < 1e-8 for q, _ in roots):
            continue
        roots.append((complex(N), float(e)))
    return roots


# -- profiles ----------------------------------------------------------------

def _field_in_layers(s, pol, N, z):
    """Transverse field (TE: E_y, TM: H_y) evaluated at depths z [nm]."""
    _, _, states = _propagate(s, np.array([N]), pol, keep=True)
    k0 = s.k0
    zi = s.interfaces
    U = np.zeros_like(z, dtype=complex)
    below = z < 0
    q_s = complex(_outer_q(s.n[0], N))
    U[below] = np.exp(-1j * q_s * k0 * z[below])
    for j, (nj, dj) in enumerate(zip(s.n[1:-1], s.d)):
        m = (z >= zi[j]) & (z < zi[j + 1])
        if not m.any():
            continue
        U0, V0 = complex(states[j][0][0]), complex(states[j][1][0])
        q = np.sqrt(nj**2 - N**2 + 0j)
        pj = nj**2 if pol == "TM" else 1.0
        t = k0 * (z[m] - zi[j])
        sinc_q = np.sin(q * t) / q if abs(q) > 1e-12 else t
        U[m] = U0 * np.cos(q * t) + pj * V0 * sinc_q
    above = z >= zi[-1]
    q_c = complex(_outer_q(s.n[-1], N))
    U[above] = complex(states[-1][0][0]) * np.exp(1j * q_c * k0 * (z[above] - zi[-1]))
    return U


def _index_at(s, z):
    zi = s.interfaces
    j = np.searchsorted(zi, z, side="right")  # 0 -> substrate, len(d)+1 -> superstrate
    return s.n[np.clip(j, 0, len(s.n) - 1)]


def _efield(s, pol, N, z):
    U = _field_in_layers(s, pol, N, z)
    if pol == "TM":
        U = U * N / _index_at(s, z) ** 2
    return U


def _region_power(s, pol, N, pad):
    """Exact-ish int |E|^2 over each region (substrate pad, layers, superstrate pad)."""
    zi = s.interfaces
    bounds = [(-pad, 0.0)] + [(zi[j], zi[j + 1]) for j in range(len(s.d))] + [(zi[-1], zi[-1] + pad)]
    out = []
    for a, b in bounds:
        # nudge off the interfaces so each sample belongs to the region
        zz = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
        zz = np.clip(zz, a + 1e-9 * (b - a), b - 1e-9 * (b - a))
        out.append(0.5 * (b - a) * np.sum(_GL_W * np.abs(_efield(s, pol, N, zz)) ** 2))
    return np.array(out)


def depth_grid(stack_or_structure, step=GRID_STEP_NM, pad=GRID_PAD_NM):
    d = stack_or_structure.d if isinstance(stack_or_structure, Structure) else \
        np.array([layer.thickness_nm for layer in stack_or_structure.layers])
    top = float(np.sum(d))
    n = int(np.round((top + 2 * pad) / step))
    return -pad + step * np.arange(n + 1)


def _make_mode(s, pol, N, res, z, pad):
    E = _efield(s, pol, N, z)
    k = np.argmax(np.abs(E))
    E = E * np.exp(-1j * np.angle(E[k]))
    norm = np.sqrt(trapezoid(np.abs(E) ** 2, z))
    E = E / norm
    if np.max(np.abs(E.imag)) < 1e-12 * np.max(np.abs(E.real)):
        E = E.real
    power = _region_power(s, pol, N, pad)
    core = power[1:-1][s.core].sum() if s.core is not None else 0.0
    conf = float(core / power.sum())
    fam = "tir" if N.real >= s.cladding_index or conf < BRAGG_CORE_CONFINEMENT else "bragg"
    return dict(polarization=pol, family=fam, n_eff=complex(N), wavelength=s.wavelength,
                z=z, field=E, confinement=conf, residual=res)


def _solve(s: Structure, pol, n_lo, n_hi, step, max_imag, grid_step, pad):
    pol = pol.upper()
    if pol not in ("TE", "TM"):
        raise ValueError(f"polarization must be TE or TM, got {pol!r}")
    if n_hi is None:
        n_hi = float(np.max(s.n[1:-1].real)) - 1e-9
    if n_lo is None:
        n_lo = max(float(np.min(s.n[1:-1].real)) - 0.3, float(s.n[-1].real) + 1e-6)
    roots = _roots(s, pol, n_lo, n_hi, step, max_imag)
    z = depth_grid(s, grid_step, pad)
    raw = [_make_mode(s, pol, N, res, z, pad) for N, res in roots]
    # keep TIR modes and Bragg-confined ones; radiation-like roots with little
    # core weight below the cladding index are dropped
    kept = [m for m in raw if m["family"] == "tir" and m["n_eff"].real >= s.cladding_index
            or m["family"] == "bragg"]
    counters = {"tir": 0, "bragg": 0}
    modes = []
    for m in kept:
        modes.append(GuidedMode(order=counters[m["family"]], **m))
        counters[m["family"]] += 1
    return modes


def find_modes(stack: LayerStack, wavelength, pol="TE", table=None, *, lossy=False,
               n_range=(None, None), step=SCAN_STEP, max_imag=MAX_IMAG,
               grid_step=GRID_STEP_NM, pad=GRID_PAD_NM, group_index=True):
    """All TIR and Bragg modes at one wavelength, sorted by descending Re(n_eff).

    Roots are bracketed on a real scan of the effective index and polished
    in the complex plane.  Leaky roots with Im(n_eff) > `max_imag` are
    discarded.  Group indices come from re-solving at wavelength +/- 0.5 nm.
    """
    s = Structure.from_stack(stack, wavelength, table, lossy=lossy)
    modes = _solve(s, pol, *n_range, step, max_imag, grid_step, pad)
    if group_index and modes:
        modes = [replace(m, n_g=_group_index(stack, m, table, lossy)) for m in modes]
    return modes


def _group_index(stack, mode, table, lossy, dl=0.5):
    lam = mode.wavelength
    vals = []
    for l in (lam - dl, lam + dl):
        s = Structure.from_stack(stack, l, table, lossy=lossy)
        r = _polish(s, mode.polarization, mode.n_eff)
        if r is None:
            return float("nan")
        vals.append(r[0].real)
    return float(mode.n_eff.real - lam * (vals[1] - vals[0]) / (2 * dl))


def solve_structure(n, d, wavelength, pol="TE", core=None, **kw):
    """Mode search on explicit indices: n = (substrate, layers..., superstrate), d in nm."""
    n = np.asarray(n, dtype=complex)
    d = np.asarray(d, dtype=float)
    core = np.zeros(len(d), bool) if core is None else np.asarray(core, bool)
    s = Structure(n=n, d=d, wavelength=float(wavelength), core=core)
    return _solve(s, pol, kw.get("n_lo"), kw.get("n_hi"), kw.get("step", SCAN_STEP),
                  kw.get("max_imag", MAX_IMAG), kw.get("grid_step", GRID_STEP_NM), kw.get("pad", GRID_PAD_NM))


def select_mode(modes, family="tir", order=0):
    for m in modes:
        if m.family == family and m.order == order:
            return m
    return None


# -- dispersion curves -------------------------------------------------------

class ModeTrackingError(RuntimeError):
    def __init__(self, message, last_good_wavelength=None):
        self.last_good_wavelength = last_good_wavelength
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class DispersionCurve:
    polarization: str
    family: str
    order: int
    wavelength: np.ndarray
    n_eff: np.ndarray  # complex
    n_g: np.ndarray
    temperature: float

    def __post_init__(self):
        if np.any(np.diff(self.wavelength) <= 0):
            raise ValueError("wavelength grid must be strictly increasing")

    @property
    def alpha(self):
        return alpha_from_imag_index(self.n_eff.imag, self.wavelength)

    def neff_at(self, wavelength):
        """Cubic-spline interpolated Re(n_eff); raises outside the grid."""
        w = np.asarray(wavelength, dtype=float)
        if np.any(w < self.wavelength[0] - 1e-9) or np.any(w > self.wavelength[-1] + 1e-9):
            raise materials.DispersionRangeError("wavelength_nm", wavelength,
                                                 (self.wavelength[0], self.wavelength[-1]),
                                                 f"{self.polarization}-{self.family}{self.order} curve")
        return self._spline(w)

    def ng_at(self, wavelength):
        w = np.asarray(wavelength, dtype=float)
        return self.neff_at(w) - w * self._spline(w, 1)

    def _spline(self, w, nu=0):
        from scipy.interpolate import CubicSpline
        sp = self.__dict__.get("_sp")
        if sp is None:
            sp = CubicSpline(self.wavelength, self.n_eff.real)
            object.__setattr__(self, "_sp", sp)
        return sp(w, nu)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["wavelength_nm", "n_eff_re", "n_eff_im", "n_g", "alpha_cm1"])
            for row in zip(self.wavelength, self.n_eff.real, self.n_eff.imag, self.n_g, self.alpha):
                wr.writerow([f"{v:.10g}" for v in row])


def _still_guided(s, N, family, max_imag):
    """A polished root that crossed cutoff turns leaky or leaves its family."""
    if abs(N.imag) > max_imag:
        return False
    return family == "bragg" or N.real >= s.cladding_index


def dispersion_curve(stack: LayerStack, pol, family, order, wavelengths, T=None, table=None, *,
                     lossy=False, max_lost=0.1, **kw):
    """Track one mode across a wavelength grid by continuity in n_eff.

    The mode is picked by (family, order) at the first grid point where it
    exists and then followed by polishing from the previous root.  The group
    index is a central finite difference of the tracked n_eff (one-sided at
    the ends).
    """
    wl = np.asarray(wavelengths, dtype=float)
    max_imag = kw.get("max_imag", MAX_IMAG)
    if T is not None:
        stack = stack.at_temperature(T)
    neff = np.full(len(wl), np.nan + 0j)
    prev = None
    last_good = None
    for i, lam in enumerate(wl):
        s = Structure.from_stack(stack, lam, table, lossy=lossy)
        r = None
        if prev is not None:
            r = _polish(s, pol.upper(), prev)
            if r is not None and (abs(r[0] - prev) > 0.05 or not _still_guided(s, r[0], family, max_imag)):
                r = None
        if r is None:
            modes = _solve(s, pol.upper(), None, None, kw.get("step", SCAN_STEP), max_imag,
                           GRID_STEP_NM, GRID_PAD_NM)
            m = select_mode(modes, family, order)
            if m is not None and (prev is None or abs(m.n_eff - prev) < 0.05):
                r = (m.n_eff, m.residual)
        if r is not None:
            neff[i] = r[0]
            prev = r[0]
            last_good = lam
    lost = np.isnan(neff.real)
    if lost.mean() > max_lost:
        raise ModeTrackingError(
            f"{pol}-{family}{order} lost on {lost.sum()}/{len(wl)} grid points", last_good)
    if lost.any():
        good = ~lost
        neff = np.interp(wl, wl[good], neff[good].real) + 1j * np.interp(wl, wl[good], neff[good].imag)
    ng = neff.real - wl * np.gradient(neff.real, wl, edge_order=2)
    return DispersionCurve(pol.upper(), family, order, wl, neff, ng, stack.temperature_K)


def overlap_integral(pump, signal, idler, nonlinear=1.0):
    """Normalised nonlinear overlap of three transverse profiles.

    ``|int d(z) E_p* E_s E_i dz| / sqrt(int|E_p|^2 int|E_s|^2 int|E_i|^2)``

    Modes may be GuidedMode objects or (z, field) pairs.  `nonlinear` is a
    scalar, an array on the pump grid, or a callable of depth [nm].  Profiles
    on other grids are linearly resampled onto the pump grid; a profile that
    does not cover that grid is an error.  Units: [d] / sqrt(nm).
    """
    zs, fs = [], []
    for m in (pump, signal, idler):
        z, f = (m.z, m.field) if hasattr(m, "z") else m
        zs.append(np.asarray(z, dtype=float))
        fs.append(np.asarray(f))
    z = zs[0]
    for k in (1, 2):
        if len(zs[k]) != len(z) or not np.allclose(zs[k], z, rtol=0, atol=1e-9):
            if zs[k][0] > z[0] + 1e-9 or zs[k][-1] < z[-1] - 1e-9:
                raise ValueError("profile spans are incompatible; cannot resample onto the pump grid")
            fs[k] = np.interp(z, zs[k], fs[k].real) + 1j * np.interp(z, zs[k], np.imag(fs[k]))
    d = nonlinear(z) if callable(nonlinear) else np.broadcast_to(np.asarray(nonlinear, dtype=float), z.shape)
    norms = [np.sqrt(trapezoid(np.abs(f) ** 2, z)) for f in fs]
    if min(norms) == 0:
        raise ValueError("zero field profile")
    num = trapezoid(d * np.conj(fs[0]) * fs[1] * fs[2], z)
    return float(np.abs(num) / np.prod(norms))


def nonlinear_profile(stack: LayerStack, z, d_of_x):
    """Per-layer nonlinear coefficient sampled at depths z; zero outside the layers."""
    zi = stack.interfaces_nm
    j = np.searchsorted(zi, z, side="right") - 1
    vals = np.array([d_of_x(layer.x) for layer in stack.layers], dtype=float)
    out = np.zeros_like(np.asarray(z, dtype=float))
    inside = (j >= 0) & (j < len(vals))
    out[inside] = vals[j[inside]]
    return out


def export_profiles(modes, path):
    doc = [{
        "polarization": m.polarization, "family": m.family, "order": m.order,
        "wavelength_nm": m.wavelength, "n_eff_re": m.n_eff.real, "n_eff_im": m.n_eff.imag,
        "n_g": m.n_g, "alpha_cm1": m.alpha, "confinement": m.confinement,
        "z_nm": m.z.tolist(), "field_re": np.real(m.field).tolist(), "field_im": np.imag(m.field).tolist(),
    } for m in modes]
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
