"""SHG spectrum of the cavity, a round-trip fit, and Fabry-Perot loss extraction."""
import numpy as np

from pairforge import layerstack, materials
from pairforge.nonlinear import (ShgParams, extract_loss_fp, fit_shg, mode_curves,
                                 shg_bandwidth, shg_spectrum, synthesize_fp)

table = materials.default_table()
stack = layerstack.load_device(table=table)
L = stack.ridge.length_cm

curves = mode_curves(stack, 292.15, pump_range=(775.0, 795.0), table=table)
center, fwhm = shg_bandwidth(curves, L)
print(f"SHG envelope at 19 C: center {center:.3f} nm, FWHM {fwhm:.4f} nm for L = {L} cm")

# %% the cavity puts fast fringes on top of the sinc^2 envelope
f = stack.facets
truth = ShgParams(35.0, center, fwhm, L, 1.0, (f.R_te00, f.R_tm00, f.R_teb), (2.0, 2.0, 2.0),
                  (3.23, 3.23, 4.0), (0.4, 1.1, 2.0))
lam = np.arange(center - 2.0, center + 2.0, 0.002)
y = shg_spectrum(truth, lam)
print(f"peak SH power {y.max():.3e} W at 1 W fundamental, cavity-enhanced")

noisy = y + np.random.default_rng(5).normal(0.0, 0.01 * y.max(), y.shape)
fit = fit_shg(lam, noisy, R=truth.R, alpha_cm1=truth.alpha_cm1, n_g=truth.n_g, length_cm=L)
print(f"fit with 1 % noise: eta {fit.eta_pct:.2f} %/W/cm^2 (truth 35), center {fit.center_nm:.3f} nm, "
      f"FWHM {fit.fwhm_nm:.4f} nm")

# %% loss from fringe contrast
print("\nalpha_true  alpha_fit  fringes")
lam = np.arange(1565.0, 1567.0, 0.0005)
for a in (0.5, 1.0, 2.0, 4.0):
    res = extract_loss_fp(lam, synthesize_fp(lam, a, f.R_te00, L), f.R_te00, L)
    print(f"{a:10.2f} {res.alpha_cm1:10.4f} {res.n_fringes:8d}")
