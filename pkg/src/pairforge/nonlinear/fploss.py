"""Propagation loss from Fabry-Perot fringe contrast."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal


class LossExtractionError(ValueError):
    pass


@dataclass(frozen=True)
class FpLoss:
    alpha_cm1: float
    std_cm1: float
    contrasts: tuple
    alphas: tuple
    R: float
    length_cm: float

    @property
    def n_fringes(self):
        return len(self.alphas)


def synthesize_fp(wavelengths, alpha_cm1, R, length_cm, n_eff=3.2, n_g=None, center_nm=None):
    """Transmission of a lossy FP cavity (Airy function), unit input power."""
    lam = np.asarray(wavelengths, dtype=float)
    x = R * np.exp(-alpha_cm1 * length_cm)
    if n_g is None:
        phi = 2 * np.pi * n_eff * length_cm * 1e7 / lam
    else:
        c = lam.mean() if center_nm is None else center_nm
        phi = 2 * np.pi * length_cm * 1e7 * (n_eff / c + n_g * (1 / lam - 1 / c))
    return (1 - R) ** 2 * np.exp(-alpha_cm1 * length_cm) / ((1 - x) ** 2 + 4 * x * np.sin(phi) ** 2)


def contrast_to_loss(K, R, length_cm):
    K = np.asarray(K, dtype=float)
    if np.any(K >= 1) or np.any(K <= 0):
        raise LossExtractionError(f"fringe contrast must lie in (0, 1), got {K.min():.6f}..{K.max():.6f}")
    x = (1 - np.sqrt(1 - K**2)) / K
    if np.any(x > R * (1 + 1e-9)):
        raise LossExtractionError(f"contrast implies R*exp(-aL)={x.max():.6f} > R={R}: negative loss")
    return np.log(R / np.minimum(x, R)) / length_cm


def _refine(y, idx):
    """Parabolic vertex value through three samples around each extremum."""
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    den = y0 - 2 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(den != 0, 0.5 * (y0 - y2) / den, 0.0)
    return y1 - 0.25 * (y0 - y2) * d


def extract_loss_fp(wavelengths, intensity, R, length_cm, min_fringes=2):
    """Mean loss [cm^-1] and spread over fringes from K = (Imax - Imin)/(Imax + Imin).

    Each maximum is paired with the following minimum.
    """
    if not 0 < R < 1:
        raise LossExtractionError(f"facet reflectivity must lie in (0, 1), got {R}")
    if length_cm <= 0:
        raise LossExtractionError("length must be positive")
    lam = np.asarray(wavelengths, dtype=float)
    y = np.asarray(intensity, dtype=float)
    order = np.argsort(lam)
    lam, y = lam[order], y[order]
    imax, _ = signal.find_peaks(y)
    imin, _ = signal.find_peaks(-y)
    imax = imax[(imax > 0) & (imax < len(y) - 1)]
    imin = imin[(imin > 0) & (imin < len(y) - 1)]
    if len(imax) < min_fringes or len(imin) < 1:
        raise LossExtractionError(f"found {len(imax)} maxima and {len(imin)} minima; spectrum shows no usable fringes")
    vmax, vmin = _refine(y, imax), _refine(y, imin)
    K = []
    for i, m in zip(imax, vmax):
        nxt = np.searchsorted(imin, i)
        if nxt >= len(imin):
            break
        lo = vmin[nxt]
        K.append((m - lo) / (m + lo))
    if len(K) < min_fringes:
        raise LossExtractionError(f"only {len(K)} complete fringes found")
    K = np.array(K)
    alphas = contrast_to_loss(K, R, length_cm)
    return FpLoss(float(alphas.mean()), float(alphas.std(ddof=1)) if len(alphas) > 1 else 0.0,
                  tuple(K.tolist()), tuple(alphas.tolist()), R, length_cm)
